"""Quantitative reports on resolved decompositions.

Volumes, ambiguous-tet fractions, interface area, face-connected phase
components, and the cross-face consistency check.  Everything here is a
pure reduction over an immutable mesh plus a phase array; sums use
``math.fsum`` so results do not depend on accumulation order.

The AT volume ratios use the unambiguous solid volume (ambiguous tets
counted as void) as denominator.  That denominator depends on the field
only, not on the resolution rule, which keeps the ratio comparable
across rules and equal to the resolved solid volume under ``G1_void``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional

from .cutcell import BAT, IAT, CutCellMesh, facet_area
from .errors import InputError
from .field import SOLID, VOID, LevelSetField, PrimitiveScene, ScenePrimitive, Sphere, sample_scene
from .lattice import HexLattice
from .rules import Resolution, RuleConfig, resolve


@dataclass(frozen=True)
class GeometryReport:
    v_solid: float
    v_void: float
    v_at: float
    v_at_solid: float
    ratio_at: float
    ratio_at_solid: float
    interface_area: float
    solid_components: int
    void_components: int
    watertight: bool
    n_iat: int
    n_bat: int

    def to_dict(self) -> dict:
        return asdict(self)


def _phase_of(res: Resolution, tet_idx: int) -> int:
    p = int(res.phases[tet_idx])
    if p == 0:
        raise InputError(f"tet {tet_idx} has no phase assigned")
    return p


def _lattice_face_facets(res: Resolution):
    """(face id, facet key, incident tets, uniform neighbour sign) rows.

    Covers every triangle lying on an interior lattice face, each once.
    ``uniform_sign`` is None when both incident cells are tessellated.
    The rows are phase-independent and cached on the mesh.
    """
    return res.mesh.lattice_face_triangles()


def watertight_check(res: Resolution) -> tuple[bool, list[dict]]:
    """Check phase consistency across every interior lattice face.

    A face triangle whose two sides carry different phases would put a
    piece of solid/void boundary on the background mesh itself, i.e. the
    two neighbouring cells disagree about the geometry they share.  The
    same goes for a triangle with no matching partner on a tessellated
    neighbour.  Returns (ok, offending facets).
    """
    mesh = res.mesh
    offenders = []
    for face, key, incident, uniform_sign in _lattice_face_facets(res):
        if len(incident) == 2:
            pa, pb = _phase_of(res, incident[0]), _phase_of(res, incident[1])
            if pa != pb:
                offenders.append({
                    "face": face,
                    "kind": "phase_mismatch",
                    "tets": list(incident),
                    "phases": [pa, pb],
                })
        elif uniform_sign is not None:
            p = _phase_of(res, incident[0])
            if p != uniform_sign:
                offenders.append({
                    "face": face,
                    "kind": "phase_mismatch",
                    "tets": list(incident),
                    "phases": [p, uniform_sign],
                })
        else:
            offenders.append({
                "face": face,
                "kind": "unmatched_triangle",
                "tets": list(incident),
                "phases": [_phase_of(res, incident[0])],
            })
    return not offenders, offenders


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def _phase_components(res: Resolution) -> tuple[int, int]:
    """Face-connected components per phase, over tets and uniform cells."""
    mesh = res.mesh
    lattice = mesh.lattice
    n = len(mesh.tets)
    uniform_slot = {cell: n + i for i, cell in enumerate(sorted(mesh.uniform_cells))}
    uf = _UnionFind(n + len(uniform_slot))

    for key, incident in mesh.facet_map().items():
        if len(incident) == 2:
            i, j = incident
            if _phase_of(res, i) == _phase_of(res, j):
                uf.union(i, j)

    for face, key, incident, uniform_sign in _lattice_face_facets(res):
        if len(incident) == 1 and uniform_sign is not None:
            if _phase_of(res, incident[0]) == uniform_sign:
                uf.union(incident[0], uniform_slot[_other_cell(lattice, face, mesh.tets[incident[0]].owner_cell)])

    for cell in uniform_slot:
        for nb in lattice.cell_neighbors(cell):
            if nb in uniform_slot and nb > cell:
                if mesh.uniform_cells[nb] == mesh.uniform_cells[cell]:
                    uf.union(uniform_slot[cell], uniform_slot[nb])

    solid_roots = set()
    void_roots = set()
    for i in range(n):
        (solid_roots if _phase_of(res, i) == SOLID else void_roots).add(uf.find(i))
    for cell, slot in uniform_slot.items():
        (solid_roots if mesh.uniform_cells[cell] == SOLID else void_roots).add(uf.find(slot))
    return len(solid_roots), len(void_roots)


def _other_cell(lattice: HexLattice, face: int, cell: int) -> int:
    a = lattice.face_cells(face)
    return a[0] if a[1] == cell else a[1]


def component_count(res: Resolution, phase: int) -> int:
    """Face-connected components of one phase (+1 solid, -1 void)."""
    if phase not in (SOLID, VOID):
        raise InputError(f"phase must be {SOLID} or {VOID}, got {phase}")
    solid, void = _phase_components(res)
    return solid if phase == SOLID else void


def measure(res: Resolution, components: bool = True) -> GeometryReport:
    """Full geometric report for a resolved decomposition."""
    mesh = res.mesh
    h3 = mesh.lattice.spacing ** 3

    solid_vols = []
    void_vols = []
    at_vols = []
    at_solid_vols = []
    floor_vols = []            # unambiguous solid volume (ATs counted void)
    for i, tet in enumerate(mesh.tets):
        p = _phase_of(res, i)
        (solid_vols if p == SOLID else void_vols).append(tet.volume)
        if tet.tag != 0:
            at_vols.append(tet.volume)
            if p == SOLID:
                at_solid_vols.append(tet.volume)
        elif tet.corner_sign == SOLID:
            floor_vols.append(tet.volume)

    n_uniform_solid = sum(1 for s in mesh.uniform_cells.values() if s == SOLID)
    n_uniform_void = len(mesh.uniform_cells) - n_uniform_solid
    v_solid = math.fsum(solid_vols) + n_uniform_solid * h3
    v_void = math.fsum(void_vols) + n_uniform_void * h3
    v_at = math.fsum(at_vols)
    v_at_solid = math.fsum(at_solid_vols)
    v_floor = math.fsum(floor_vols) + n_uniform_solid * h3

    if v_floor > 0.0:
        ratio_at = v_at / v_floor
        ratio_at_solid = v_at_solid / v_floor
    else:
        ratio_at = math.inf if v_at > 0.0 else 0.0
        ratio_at_solid = math.inf if v_at_solid > 0.0 else 0.0

    areas = []
    fmap = mesh.facet_map()
    for key, incident in fmap.items():
        if len(incident) == 2:
            i, j = incident
            if _phase_of(res, i) != _phase_of(res, j):
                areas.append(facet_area(mesh.tets[i], key))
    for face, key, incident, uniform_sign in _lattice_face_facets(res):
        if len(incident) == 1 and uniform_sign is not None:
            if _phase_of(res, incident[0]) != uniform_sign:
                areas.append(facet_area(mesh.tets[incident[0]], key))
    interface_area = math.fsum(areas)

    if components:
        solid_components, void_components = _phase_components(res)
        watertight, _ = watertight_check(res)
    else:
        solid_components = void_components = 0
        watertight = True

    return GeometryReport(
        v_solid=v_solid,
        v_void=v_void,
        v_at=v_at,
        v_at_solid=v_at_solid,
        ratio_at=ratio_at,
        ratio_at_solid=ratio_at_solid,
        interface_area=interface_area,
        solid_components=solid_components,
        void_components=void_components,
        watertight=watertight,
        n_iat=sum(1 for t in mesh.tets if t.tag == IAT),
        n_bat=sum(1 for t in mesh.tets if t.tag == BAT),
    )


# -- spherical shell study ---------------------------------------------------


SHELL_PRESETS = ("octant", "full")

SHELL_CSV_HEADER = (
    "preset,rule,decider,inner_radius,outer_radius,thickness,"
    "v_solid,v_void,v_at,v_at_solid,ratio_at,ratio_at_solid,"
    "interface_area,solid_components,void_components,watertight,n_iat,n_bat"
)


@dataclass(frozen=True)
class ShellRow:
    inner_radius: float
    outer_radius: float
    thickness: float
    report: GeometryReport


@dataclass(frozen=True)
class ShellStudy:
    preset: str
    config: RuleConfig
    rows: tuple[ShellRow, ...]


def shell_preset(name: str) -> tuple[HexLattice, tuple[float, float, float]]:
    """Lattice and sphere centre for a named shell configuration.

    Both presets mesh a 3x3x3 box with 10 cells per side.  ``octant``
    centres the shell on a box corner so one eighth of it is meshed;
    ``full`` centres it in the box.
    """
    if name not in SHELL_PRESETS:
        raise InputError(f"unknown shell preset {name!r}, pick one of {SHELL_PRESETS}")
    lattice = HexLattice(dims=(10, 10, 10), origin=(0.0, 0.0, 0.0), spacing=0.3)
    center = (0.0, 0.0, 0.0) if name == "octant" else (1.5, 1.5, 1.5)
    return lattice, center


def shell_field(lattice: HexLattice, center, inner_radius: float,
                outer_radius: float) -> LevelSetField:
    """Sample a hollow sphere: solid between the two radii, void elsewhere."""
    if not (0.0 < inner_radius < outer_radius):
        raise InputError(
            f"need 0 < inner < outer, got inner={inner_radius} outer={outer_radius}"
        )
    lo = lattice.origin
    hi = tuple(lo[a] + lattice.dims[a] * lattice.spacing for a in range(3))
    near = math.dist(center, tuple(min(max(center[a], lo[a]), hi[a]) for a in range(3)))
    far = max(math.dist(center, (x, y, z)) for x in (lo[0], hi[0])
              for y in (lo[1], hi[1]) for z in (lo[2], hi[2]))
    if inner_radius > far or outer_radius < near:
        raise InputError("shell does not intersect the lattice box")
    scene = PrimitiveScene(
        background="void",
        primitives=(
            ScenePrimitive(shape=Sphere(center=center, radius=outer_radius), sense="solid"),
            ScenePrimitive(shape=Sphere(center=center, radius=inner_radius), sense="void"),
        ),
    )
    return sample_scene(lattice, scene)


def shell_study(inner_radius: float, outer_radii, config: RuleConfig,
                preset: str = "octant",
                lattice: Optional[HexLattice] = None,
                center=None, workers: int = 1) -> ShellStudy:
    """One report per outer radius, for a fixed inner radius."""
    from .cutcell import decompose

    if lattice is None or center is None:
        lattice, center = shell_preset(preset)
    rows = []
    for outer in outer_radii:
        fld = shell_field(lattice, center, inner_radius, float(outer))
        mesh = decompose(fld, workers=workers)
        res = resolve(mesh, config)
        rows.append(ShellRow(
            inner_radius=inner_radius,
            outer_radius=float(outer),
            thickness=float(outer) - inner_radius,
            report=measure(res),
        ))
    return ShellStudy(preset=preset, config=config, rows=tuple(rows))


def shell_csv(study: ShellStudy) -> str:
    """CSV table for a shell study; header is frozen for golden tests."""
    lines = [SHELL_CSV_HEADER]
    for row in study.rows:
        r = row.report
        cells = [
            study.preset, study.config.rule, study.config.decider,
            repr(row.inner_radius), repr(row.outer_radius), repr(row.thickness),
            repr(r.v_solid), repr(r.v_void), repr(r.v_at), repr(r.v_at_solid),
            repr(r.ratio_at), repr(r.ratio_at_solid), repr(r.interface_area),
            str(r.solid_components), str(r.void_components),
            str(int(r.watertight)), str(r.n_iat), str(r.n_bat),
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
