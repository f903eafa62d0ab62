"""Job execution shared by the HTTP service and the CLI.

Each ``run_*`` function takes a validated job model, does the work with the
core modules, and returns the matching response model (plus the richer
domain objects where the caller needs them, e.g. for mesh export).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cutcell import BAT, IAT, decompose
from .diagnostics import (
    GeometryReport,
    ShellStudy,
    measure,
    shell_csv,
    shell_study,
)
from .errors import InputError
from .field import (
    Cuboid,
    LevelSetField,
    PrimitiveScene,
    ScenePrimitive,
    Sphere,
    edge_crossing_t,
    sample_scene,
)
from .lattice import HexLattice
from .npac import GROUP_NAMES, canonical_group, canonicalize, orbit_counts
from .rules import IterationState, Resolution, RuleConfig, resolve
from .schemas import (
    CompareJob,
    CompareResponse,
    CutJob,
    CutResponse,
    FieldSourceSpec,
    LatticeSpec,
    NpacClassRow,
    NpacJob,
    NpacResponse,
    ShellJob,
    ShellResponse,
)
from .vtkio import export_mesh


def build_lattice(spec: LatticeSpec) -> HexLattice:
    return HexLattice(dims=tuple(spec.dims), spacing=spec.spacing, origin=tuple(spec.origin))


def _scene_from_spec(spec) -> PrimitiveScene:
    prims = []
    for p in spec.primitives:
        if p.shape.kind == "sphere":
            shape = Sphere(center=tuple(p.shape.center), radius=p.shape.radius)
        else:
            shape = Cuboid(lo=tuple(p.shape.lo), hi=tuple(p.shape.hi))
        prims.append(ScenePrimitive(shape=shape, sense=p.sense))
    return PrimitiveScene(background=spec.background, primitives=tuple(prims))


def build_field(lattice: HexLattice, source: FieldSourceSpec,
                seed_override: Optional[int] = None) -> LevelSetField:
    """Produce the nodal field a job asked for."""
    if source.explicit is not None:
        values = np.asarray(source.explicit, dtype=float)
        if values.shape != (lattice.node_count,):
            raise InputError(
                f"explicit field has {values.size} values, lattice has "
                f"{lattice.node_count} nodes"
            )
        return LevelSetField(lattice, values)
    if source.scene is not None:
        return sample_scene(lattice, _scene_from_spec(source.scene))
    preset = source.preset
    if preset.name == "shell":
        center = _preset_center(lattice, preset.preset)
        scene = PrimitiveScene(
            background="void",
            primitives=(
                ScenePrimitive(shape=Sphere(center=center, radius=preset.outer_radius),
                               sense="solid"),
                ScenePrimitive(shape=Sphere(center=center, radius=preset.inner_radius),
                               sense="void"),
            ),
        )
        if not preset.inner_radius < preset.outer_radius:
            raise InputError(
                f"shell preset needs inner < outer, got "
                f"{preset.inner_radius} >= {preset.outer_radius}"
            )
        return sample_scene(lattice, scene)
    seed = preset.seed if seed_override is None else seed_override
    rng = np.random.default_rng(seed)
    values = preset.amplitude * rng.standard_normal(lattice.node_count)
    return LevelSetField(lattice, values)


def _preset_center(lattice: HexLattice, name: str) -> tuple[float, float, float]:
    o = lattice.origin
    if name == "octant":
        return tuple(o)
    return tuple(o[a] + lattice.dims[a] * lattice.spacing / 2.0 for a in range(3))


@dataclass(frozen=True)
class CutResult:
    resolution: Resolution
    geometry: GeometryReport
    iteration_reports: tuple[dict, ...]


def run_cut(job: CutJob, seed_override: Optional[int] = None) -> CutResult:
    lattice = build_lattice(job.lattice)
    sources = [job.field]
    if job.iteration_script:
        sources.extend(job.iteration_script)

    state = IterationState() if job.rule_config.rule == "L2" else None
    config = RuleConfig(rule=job.rule_config.rule, decider=job.rule_config.decider)
    iteration_reports: list[dict] = []
    resolution: Optional[Resolution] = None
    for source in sources:
        fld = build_field(lattice, source, seed_override)
        mesh = decompose(fld, workers=job.workers)
        resolution = resolve(mesh, config, state)
        state = resolution.state
        iteration_reports.append(resolution.report.to_dict())

    geometry = measure(resolution)
    return CutResult(
        resolution=resolution,
        geometry=geometry,
        iteration_reports=tuple(iteration_reports),
    )


def cut_response(result: CutResult, include_mesh: bool = True) -> CutResponse:
    mesh_text = None
    if include_mesh:
        buf = io.StringIO()
        export_mesh(result.resolution, buf)
        mesh_text = buf.getvalue()
    return CutResponse(
        resolution_report=result.resolution.report.to_dict(),
        geometry_report=result.geometry.to_dict(),
        mesh_text=mesh_text,
        iteration_reports=tuple(result.iteration_reports),
    )


def run_npac(job: NpacJob) -> NpacResponse:
    counts = orbit_counts()
    group = canonical_group()

    orbit_sizes: dict[int, int] = {}
    for code in range(1, 255):
        rep = canonicalize(code, group).representative
        orbit_sizes[rep] = orbit_sizes.get(rep, 0) + 1

    lattice = HexLattice(dims=(1, 1, 1), spacing=1.0)
    rows = []
    for rep in sorted(orbit_sizes):
        values = np.array([1.0 if rep >> c & 1 else -1.0 for c in range(8)])
        fld = LevelSetField(lattice, values)
        mesh = decompose(fld)
        crossings = sum(
            1 for e in range(lattice.edge_count) if edge_crossing_t(fld, e) is not None
        )
        n_iat = sum(1 for t in mesh.tets if t.tag == IAT)
        n_bat = sum(1 for t in mesh.tets if t.tag == BAT)
        rows.append(
            NpacClassRow(
                representative=rep,
                orbit_size=orbit_sizes[rep],
                crossings=crossings,
                n_at=n_iat + n_bat,
                n_iat=n_iat,
                n_bat=n_bat,
            )
        )
    return NpacResponse(
        intersected_total=sum(orbit_sizes.values()),
        group_class_counts={g: counts[g] for g in GROUP_NAMES},
        classes=tuple(rows),
    )


def run_shell(job: ShellJob) -> tuple[ShellStudy, ShellResponse]:
    config = RuleConfig(rule=job.rule_config.rule, decider=job.rule_config.decider)
    study = shell_study(
        job.inner_radius,
        job.outer_radii,
        config,
        preset=job.preset,
        workers=job.workers,
    )
    rows = []
    for row in study.rows:
        entry = {
            "inner_radius": row.inner_radius,
            "outer_radius": row.outer_radius,
            "thickness": row.thickness,
        }
        entry.update(row.report.to_dict())
        rows.append(entry)
    return study, ShellResponse(csv=shell_csv(study), rows=tuple(rows))


def run_compare(job: CompareJob) -> CompareResponse:
    lattice = build_lattice(job.lattice)
    fld = build_field(lattice, job.field)
    mesh = decompose(fld, workers=job.workers)

    reports: dict[str, GeometryReport] = {}
    for rule in job.rules:
        res = resolve(mesh, RuleConfig(rule=rule, decider=job.decider))
        reports[rule] = measure(res)

    pairwise = []
    rules = list(job.rules)
    for i, ra in enumerate(rules):
        for rb in rules[i + 1:]:
            a, b = reports[ra], reports[rb]
            pairwise.append(
                {
                    "rule_a": ra,
                    "rule_b": rb,
                    "solid_volume_diff": a.v_solid - b.v_solid,
                    "solid_component_diff": a.solid_components - b.solid_components,
                    "void_component_diff": a.void_components - b.void_components,
                }
            )
    return CompareResponse(
        reports={rule: rep.to_dict() for rule, rep in reports.items()},
        pairwise=tuple(pairwise),
    )
