"""Phase assignment for ambiguous tets.

Ten rules resolve the phase of ambiguous tets (ATs) after decomposition.
The local family handles boundary ATs (BATs) with the face saddle test
and interior ATs (IATs) with a per-cell policy:

* ``L1_solid`` / ``L1_void``: fixed phase for IATs,
* ``L2``: the owning cell's persisted elemental phase (solid on the
  first iteration),
* ``L3``: the field interpolated at the mean of the cell's IAT
  centroids,
* ``L4_max`` / ``L4_min``: the phase with the larger / smaller area
  shared between the cell's IATs and its unambiguous tets.

The global family never consults the saddle test; all ATs in a cell
(``G1_solid`` / ``G1_void``) or per connected AT cluster (``G2_max`` /
``G2_min``) receive one phase.

Rules are pure: :func:`resolve` maps a decomposition to a fresh phase
array plus a report, leaving the mesh untouched, so re-running a rule is
idempotent and rules can be compared on one decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .cutcell import BAT, IAT, CutCellMesh, facet_area
from .errors import DegeneracyError, InputError
from .field import SOLID, VOID, interpolate_in_cell

RULE_NAMES = (
    "L1_solid", "L1_void", "L2", "L3", "L4_max", "L4_min",
    "G1_solid", "G1_void", "G2_max", "G2_min",
)

DECIDER_VARIANTS = ("classical", "paper")


@dataclass(frozen=True)
class RuleConfig:
    rule: str
    decider: str = "classical"

    def __post_init__(self):
        if self.rule not in RULE_NAMES:
            raise InputError(f"unknown rule {self.rule!r}, pick one of {RULE_NAMES}")
        if self.decider not in DECIDER_VARIANTS:
            raise InputError(
                f"unknown decider variant {self.decider!r}, pick one of {DECIDER_VARIANTS}"
            )


@dataclass
class IterationState:
    """Persisted elemental phases across design iterations (rule L2)."""

    iteration: int = 0
    phases: dict[int, int] = dc_field(default_factory=dict)


@dataclass
class ResolutionReport:
    rule: str
    decider: str
    iteration: Optional[int]
    n_tets: int
    n_at: int
    n_iat: int
    n_bat: int
    n_clusters: Optional[int]
    decider_ties: int = 0
    decider_zero_denominators: int = 0
    area_ties: int = 0
    zero_area_fallbacks: int = 0
    missing_state_cells: int = 0

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


@dataclass
class Resolution:
    """Phases per tet (+1 solid / -1 void) plus bookkeeping."""

    mesh: CutCellMesh
    config: RuleConfig
    phases: np.ndarray
    report: ResolutionReport
    state: Optional[IterationState] = None
    cluster_ids: Optional[dict[int, int]] = None


# -- face saddle test --------------------------------------------------------


def saddle_value(values, variant: str = "classical") -> tuple[float, bool]:
    """Value deciding an ambiguous face, from its 4 corner values in cyclic order.

    The classical variant evaluates the bilinear interpolant at its saddle
    point, (ac - bd) / (a + c - b - d); with alternating corner signs the
    denominator has the sign of the diagonal containing ``a`` and cannot
    vanish.  The ``paper`` variant divides by the plain corner sum
    instead, which can vanish; that case is reported via the second
    return value and treated as solid by the caller.
    """
    a, b, c, d = (float(v) for v in values)
    num = a * c - b * d
    if variant == "classical":
        den = a + c - b - d
        if den == 0.0:
            raise DegeneracyError(
                "saddle denominator vanished on a non-alternating face",
                detail={"values": (a, b, c, d)},
            )
        return num / den, False
    den = a + b + c + d
    if den == 0.0:
        return 0.0, True
    return num / den, False


def _face_cycle_values(mesh: CutCellMesh, face: int):
    nodes = list(mesh.lattice.face_nodes(face))
    pivot = nodes.index(min(nodes))
    nodes = nodes[pivot:] + nodes[:pivot]
    return [float(mesh.field.values[n]) for n in nodes]


def decide_bats(mesh: CutCellMesh, variant: str, phases: np.ndarray,
                report: ResolutionReport) -> None:
    """Assign every BAT the phase of its face saddle (local rules only)."""
    for idx, tet in enumerate(mesh.tets):
        if tet.tag != BAT:
            continue
        values = _face_cycle_values(mesh, tet.bat_face)
        sp, zero_den = saddle_value(values, variant)
        if zero_den:
            report.decider_zero_denominators += 1
            phases[idx] = SOLID
            continue
        if sp == 0.0:
            report.decider_ties += 1
        phases[idx] = SOLID if sp >= 0.0 else VOID


# -- shared area accounting ----------------------------------------------------


def _area_branch(a_solid: float, a_void: float, variant_max: bool,
                 report: ResolutionReport) -> int:
    """The strict-comparison branch shared by L4 and G2."""
    if a_solid == 0.0 and a_void == 0.0:
        report.zero_area_fallbacks += 1
        return SOLID
    if a_solid == a_void:
        report.area_ties += 1
    if a_solid > a_void:
        return SOLID if variant_max else VOID
    return VOID if variant_max else SOLID


# -- AT clusters ----------------------------------------------------------------


def build_at_clusters(mesh: CutCellMesh) -> tuple[dict[int, int], list[list[int]]]:
    """Connected components of ATs under shared-triangle adjacency.

    Adjacency crosses cell boundaries wherever paired BATs tile the same
    face triangle.  Cluster ids are assigned by ascending smallest member
    tet index, so they are reproducible across runs and worker counts.
    """
    at = [i for i, t in enumerate(mesh.tets) if t.tag != 0]
    parent = {i: i for i in at}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for key, tets in mesh.facet_map().items():
        if len(tets) == 2:
            i, j = tets
            if mesh.tets[i].tag != 0 and mesh.tets[j].tag != 0:
                union(i, j)

    groups: dict[int, list[int]] = {}
    for i in at:
        groups.setdefault(find(i), []).append(i)
    clusters = sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])
    ids = {}
    for cid, members in enumerate(clusters):
        for i in members:
            ids[i] = cid
    return ids, clusters


# -- resolve -------------------------------------------------------------------


def resolve(mesh: CutCellMesh, config: RuleConfig,
            state: Optional[IterationState] = None) -> Resolution:
    """Resolve all ambiguous tets of a decomposition under one rule."""
    n = len(mesh.tets)
    phases = np.array([t.corner_sign for t in mesh.tets], dtype=np.int8)
    n_iat = sum(1 for t in mesh.tets if t.tag == IAT)
    n_bat = sum(1 for t in mesh.tets if t.tag == BAT)
    report = ResolutionReport(
        rule=config.rule,
        decider=config.decider,
        iteration=None,
        n_tets=n,
        n_at=n_iat + n_bat,
        n_iat=n_iat,
        n_bat=n_bat,
        n_clusters=None,
    )

    rule = config.rule
    new_state = None
    cluster_ids = None

    if rule.startswith("G1"):
        p = SOLID if rule.endswith("solid") else VOID
        for i, t in enumerate(mesh.tets):
            if t.tag != 0:
                phases[i] = p
    elif rule.startswith("G2"):
        cluster_ids, clusters = build_at_clusters(mesh)
        report.n_clusters = len(clusters)
        fmap = mesh.facet_map()
        tet_facets = mesh.tet_facets()
        for members in clusters:
            a_solid = 0.0
            a_void = 0.0
            member_set = set(members)
            for i in members:
                for facet in tet_facets[i]:
                    incident = fmap[facet]
                    if len(incident) != 2:
                        continue
                    other = incident[0] if incident[1] == i else incident[1]
                    if mesh.tets[other].tag != 0:
                        continue          # both sides ambiguous: skip
                    area = facet_area(mesh.tets[i], facet)
                    if phases[other] == SOLID:
                        a_solid += area
                    else:
                        a_void += area
            p = _area_branch(a_solid, a_void, rule.endswith("max"), report)
            for i in member_set:
                phases[i] = p
    else:
        decide_bats(mesh, config.decider, phases, report)
        if rule.startswith("L1"):
            p = SOLID if rule.endswith("solid") else VOID
            for i, t in enumerate(mesh.tets):
                if t.tag == IAT:
                    phases[i] = p
        elif rule == "L2":
            prev = state or IterationState()
            it = prev.iteration + 1
            report.iteration = it
            next_phases = dict(prev.phases)
            for cell, sign in mesh.uniform_cells.items():
                next_phases[cell] = sign
            for cell in mesh.cell_tets:
                if it == 1:
                    next_phases[cell] = SOLID
                elif cell not in next_phases:
                    report.missing_state_cells += 1
                    next_phases[cell] = SOLID
            for cell, (lo, hi) in mesh.cell_tets.items():
                p = next_phases[cell]
                for i in range(lo, hi):
                    if mesh.tets[i].tag == IAT:
                        phases[i] = p
            new_state = IterationState(iteration=it, phases=next_phases)
        elif rule == "L3":
            for cell, (lo, hi) in mesh.cell_tets.items():
                iats = [i for i in range(lo, hi) if mesh.tets[i].tag == IAT]
                if not iats:
                    continue
                centroids = np.stack([mesh.tets[i].coords.mean(axis=0) for i in iats])
                probe = centroids.mean(axis=0)
                value = interpolate_in_cell(mesh.field, cell, probe)
                p = SOLID if value >= 0.0 else VOID
                for i in iats:
                    phases[i] = p
        else:   # L4_max / L4_min
            fmap = mesh.facet_map()
            tet_facets = mesh.tet_facets()
            for cell, (lo, hi) in mesh.cell_tets.items():
                iats = [i for i in range(lo, hi) if mesh.tets[i].tag == IAT]
                if not iats:
                    continue
                a_solid = 0.0
                a_void = 0.0
                for i in iats:
                    for facet in tet_facets[i]:
                        incident = fmap[facet]
                        if len(incident) != 2:
                            continue
                        other = incident[0] if incident[1] == i else incident[1]
                        if mesh.tets[other].tag != 0:
                            continue      # both sides ambiguous: skip
                        area = facet_area(mesh.tets[i], facet)
                        if phases[other] == SOLID:
                            a_solid += area
                        else:
                            a_void += area
                p = _area_branch(a_solid, a_void, rule.endswith("max"), report)
                for i in iats:
                    phases[i] = p

    return Resolution(
        mesh=mesh,
        config=config,
        phases=phases,
        report=report,
        state=new_state,
        cluster_ids=cluster_ids,
    )
