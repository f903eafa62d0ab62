"""Request and response models for the job layer, the service, and the CLI.

Every job model carries a ``schema_version`` and rejects unknown fields, so
a typo in a job file fails loudly instead of being silently ignored.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .rules import DECIDER_VARIANTS, RULE_NAMES

SCHEMA_VERSION = 1


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LatticeSpec(StrictModel):
    dims: tuple[int, int, int]
    spacing: float = Field(gt=0.0)
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @model_validator(mode="after")
    def _positive_dims(self):
        if any(d < 1 for d in self.dims):
            raise ValueError(f"lattice dims must be positive, got {self.dims}")
        return self


class SphereSpec(StrictModel):
    kind: Literal["sphere"] = "sphere"
    center: tuple[float, float, float]
    radius: float = Field(gt=0.0)


class CuboidSpec(StrictModel):
    kind: Literal["cuboid"] = "cuboid"
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    @model_validator(mode="after")
    def _ordered(self):
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"cuboid needs lo < hi per axis, got {self.lo} {self.hi}")
        return self


class PrimitiveSpec(StrictModel):
    shape: Union[SphereSpec, CuboidSpec] = Field(discriminator="kind")
    sense: Literal["solid", "void"]


class SceneSpec(StrictModel):
    background: Literal["solid", "void"] = "void"
    primitives: tuple[PrimitiveSpec, ...] = ()


class ShellPresetSpec(StrictModel):
    """Hollow-sphere field on the preset study lattice."""

    name: Literal["shell"] = "shell"
    preset: Literal["octant", "full"] = "octant"
    inner_radius: float = Field(gt=0.0)
    outer_radius: float = Field(gt=0.0)


class RandomPresetSpec(StrictModel):
    """Reproducible random nodal field, for validation runs."""

    name: Literal["random"] = "random"
    seed: int = 0
    amplitude: float = Field(default=1.0, gt=0.0)


PresetSpec = Union[ShellPresetSpec, RandomPresetSpec]


class FieldSourceSpec(StrictModel):
    """Exactly one way of producing nodal values."""

    explicit: Optional[tuple[float, ...]] = None
    scene: Optional[SceneSpec] = None
    preset: Optional[PresetSpec] = Field(default=None, discriminator="name")

    @model_validator(mode="after")
    def _exactly_one(self):
        given = [n for n in ("explicit", "scene", "preset") if getattr(self, n) is not None]
        if len(given) != 1:
            raise ValueError(f"exactly one field source required, got {given or 'none'}")
        return self


class RuleConfigSpec(StrictModel):
    rule: str = "G1_void"
    decider: str = "classical"

    @model_validator(mode="after")
    def _known(self):
        if self.rule not in RULE_NAMES:
            raise ValueError(f"unknown rule {self.rule!r}; valid: {', '.join(RULE_NAMES)}")
        if self.decider not in DECIDER_VARIANTS:
            raise ValueError(
                f"unknown decider {self.decider!r}; valid: {', '.join(DECIDER_VARIANTS)}"
            )
        return self


class CutJob(StrictModel):
    schema_version: int = SCHEMA_VERSION
    lattice: LatticeSpec
    field: FieldSourceSpec
    rule_config: RuleConfigSpec = RuleConfigSpec()
    iteration_script: Optional[tuple[FieldSourceSpec, ...]] = None
    workers: int = Field(default=1, ge=1)
    include_mesh: bool = True

    @model_validator(mode="after")
    def _version_and_script(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {self.schema_version}, expected {SCHEMA_VERSION}"
            )
        if self.iteration_script is not None and self.rule_config.rule != "L2":
            raise ValueError("iteration_script is only meaningful with rule L2")
        return self


class NpacJob(StrictModel):
    schema_version: int = SCHEMA_VERSION

    @model_validator(mode="after")
    def _version(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {self.schema_version}, expected {SCHEMA_VERSION}"
            )
        return self


class ShellJob(StrictModel):
    schema_version: int = SCHEMA_VERSION
    preset: Literal["octant", "full"] = "octant"
    inner_radius: float = Field(gt=0.0)
    outer_radii: tuple[float, ...] = Field(min_length=1)
    rule_config: RuleConfigSpec = RuleConfigSpec()
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _version(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {self.schema_version}, expected {SCHEMA_VERSION}"
            )
        return self


class CompareJob(StrictModel):
    schema_version: int = SCHEMA_VERSION
    lattice: LatticeSpec
    field: FieldSourceSpec
    rules: tuple[str, ...] = Field(min_length=2)
    decider: str = "classical"
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _known(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {self.schema_version}, expected {SCHEMA_VERSION}"
            )
        for rule in self.rules:
            if rule not in RULE_NAMES:
                raise ValueError(f"unknown rule {rule!r}; valid: {', '.join(RULE_NAMES)}")
        if self.decider not in DECIDER_VARIANTS:
            raise ValueError(
                f"unknown decider {self.decider!r}; valid: {', '.join(DECIDER_VARIANTS)}"
            )
        return self


# -- responses ---------------------------------------------------------------


class CutResponse(StrictModel):
    resolution_report: dict
    geometry_report: dict
    mesh_text: Optional[str] = None
    iteration_reports: Optional[tuple[dict, ...]] = None


class NpacClassRow(StrictModel):
    representative: int
    orbit_size: int
    crossings: int
    n_at: int
    n_iat: int
    n_bat: int


class NpacResponse(StrictModel):
    intersected_total: int
    group_class_counts: dict[str, int]
    classes: tuple[NpacClassRow, ...]


class ShellResponse(StrictModel):
    csv: str
    rows: tuple[dict, ...]


class CompareResponse(StrictModel):
    reports: dict[str, dict]
    pairwise: tuple[dict, ...]
