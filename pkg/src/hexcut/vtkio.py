"""Legacy-ASCII unstructured-grid export and re-import.

The writer emits one file per resolved mesh: deduplicated points, the
cut-cell tets as VTK_TETRA, uniform cells as VTK_HEXAHEDRON, and three
cell-data arrays:

* ``phase``      0 = void, 1 = solid
* ``ambiguity``  0 = unambiguous, 1 = interior ambiguous, 2 = boundary ambiguous
* ``owner_cell`` lattice cell id the element came from

Coordinates are written with 17 significant digits so a written file
re-measures to the in-memory volumes within 1e-9 relative, and the output
is deterministic: byte-identical for repeated runs and any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cutcell import BAT, IAT, UNAMBIGUOUS, VertexRef
from .errors import InputError, OutputError
from .lattice import CELL_FACE_CORNERS

_HEADER = "# vtk DataFile Version 3.0"
_TITLE = "hexcut cut-cell mesh"

# local corner order of a VTK_HEXAHEDRON: bottom loop then top loop
_VTK_HEX_ORDER = (0, 1, 3, 2, 4, 5, 7, 6)

_AMBIGUITY_CODE = {UNAMBIGUOUS: 0, IAT: 1, BAT: 2}


def _fmt(x: float) -> str:
    return "%.17g" % x


def export_mesh(resolution, stream) -> None:
    """Write a resolved mesh to ``stream`` as a legacy ASCII unstructured grid."""
    mesh = resolution.mesh
    lat = mesh.lattice

    coords: dict[VertexRef, np.ndarray] = {}
    for tet in mesh.tets:
        for ref, xyz in zip(tet.verts, tet.coords):
            coords.setdefault(ref, xyz)
    for cell in mesh.uniform_cells:
        for node in lat.cell_nodes(cell):
            coords.setdefault(VertexRef("corner", node), lat.node_position(node))
    ordered = sorted(coords)
    refs = {ref: idx for idx, ref in enumerate(ordered)}

    points = np.empty((len(ordered), 3), dtype=float)
    for idx, ref in enumerate(ordered):
        points[idx] = coords[ref]

    uniform = sorted(mesh.uniform_cells)
    n_cells = len(mesh.tets) + len(uniform)

    w = stream.write
    w(_HEADER + "\n")
    w(_TITLE + "\n")
    w("ASCII\n")
    w("DATASET UNSTRUCTURED_GRID\n")
    w(f"POINTS {len(ordered)} double\n")
    for p in points:
        w(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")

    size = 5 * len(mesh.tets) + 9 * len(uniform)
    w(f"CELLS {n_cells} {size}\n")
    for tet in mesh.tets:
        ids = " ".join(str(refs[r]) for r in tet.verts)
        w(f"4 {ids}\n")
    for cell in uniform:
        nodes = lat.cell_nodes(cell)
        ids = " ".join(str(refs[VertexRef("corner", nodes[c])]) for c in _VTK_HEX_ORDER)
        w(f"8 {ids}\n")

    w(f"CELL_TYPES {n_cells}\n")
    for _ in mesh.tets:
        w("10\n")
    for _ in uniform:
        w("12\n")

    w(f"CELL_DATA {n_cells}\n")
    w("SCALARS phase int 1\nLOOKUP_TABLE default\n")
    for ti in range(len(mesh.tets)):
        w("1\n" if resolution.phases[ti] > 0 else "0\n")
    for cell in uniform:
        w("1\n" if mesh.uniform_cells[cell] > 0 else "0\n")

    w("SCALARS ambiguity int 1\nLOOKUP_TABLE default\n")
    for tet in mesh.tets:
        w(f"{_AMBIGUITY_CODE[tet.tag]}\n")
    for _ in uniform:
        w("0\n")

    w("SCALARS owner_cell int 1\nLOOKUP_TABLE default\n")
    for tet in mesh.tets:
        w(f"{tet.owner_cell}\n")
    for cell in uniform:
        w(f"{cell}\n")


def export_mesh_file(resolution, path) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            export_mesh(resolution, fh)
    except OSError as exc:
        raise OutputError(f"cannot write mesh file {path}: {exc}") from exc


@dataclass(frozen=True)
class GridFile:
    """Parsed contents of an exported unstructured-grid file."""

    points: np.ndarray
    cells: tuple[tuple[int, ...], ...]
    cell_types: tuple[int, ...]
    phase: tuple[int, ...]
    ambiguity: tuple[int, ...]
    owner_cell: tuple[int, ...]

    def cell_volume(self, i: int) -> float:
        ids = self.cells[i]
        p = self.points
        if self.cell_types[i] == 10:
            a, b, c, d = (p[j] for j in ids)
            return abs(float(np.dot(np.cross(a - d, b - d), c - d))) / 6.0
        # axis-aligned hexahedron: edge vectors from the first corner
        o, ex, ey, ez = p[ids[0]], p[ids[1]], p[ids[3]], p[ids[4]]
        return abs(float(np.dot(np.cross(ex - o, ey - o), ez - o)))

    def volumes(self) -> dict[str, float]:
        """Phase and ambiguity volume totals, as a GeometryReport subset."""
        v_solid = []
        v_void = []
        v_at = []
        v_at_solid = []
        for i in range(len(self.cells)):
            v = self.cell_volume(i)
            (v_solid if self.phase[i] == 1 else v_void).append(v)
            if self.ambiguity[i] != 0:
                v_at.append(v)
                if self.phase[i] == 1:
                    v_at_solid.append(v)
        return {
            "v_solid": math.fsum(v_solid),
            "v_void": math.fsum(v_void),
            "v_at": math.fsum(v_at),
            "v_at_solid": math.fsum(v_at_solid),
        }


def read_mesh(stream) -> GridFile:
    """Parse a file produced by :func:`export_mesh`."""
    lines = [ln.strip() for ln in stream.read().splitlines() if ln.strip()]
    pos = 0

    def expect(prefix: str) -> str:
        nonlocal pos
        if pos >= len(lines) or not lines[pos].startswith(prefix):
            got = lines[pos] if pos < len(lines) else "<eof>"
            raise InputError(f"expected {prefix!r} in grid file, got {got!r}")
        line = lines[pos]
        pos += 1
        return line

    expect("# vtk DataFile")
    pos += 1          # title
    expect("ASCII")
    expect("DATASET UNSTRUCTURED_GRID")

    n_points = int(expect("POINTS").split()[1])
    points = np.empty((n_points, 3), dtype=float)
    for i in range(n_points):
        points[i] = [float(v) for v in lines[pos].split()]
        pos += 1

    n_cells = int(expect("CELLS").split()[1])
    cells = []
    for _ in range(n_cells):
        parts = [int(v) for v in lines[pos].split()]
        pos += 1
        if parts[0] != len(parts) - 1:
            raise InputError(f"malformed cell row: {parts}")
        cells.append(tuple(parts[1:]))

    expect("CELL_TYPES")
    cell_types = []
    for _ in range(n_cells):
        cell_types.append(int(lines[pos]))
        pos += 1

    expect("CELL_DATA")
    arrays: dict[str, list[int]] = {}
    for _ in range(3):
        name = expect("SCALARS").split()[1]
        expect("LOOKUP_TABLE")
        vals = []
        for _ in range(n_cells):
            vals.append(int(lines[pos]))
            pos += 1
        arrays[name] = vals

    for need in ("phase", "ambiguity", "owner_cell"):
        if need not in arrays:
            raise InputError(f"grid file missing cell array {need!r}")

    return GridFile(
        points=points,
        cells=tuple(cells),
        cell_types=tuple(cell_types),
        phase=tuple(arrays["phase"]),
        ambiguity=tuple(arrays["ambiguity"]),
        owner_cell=tuple(arrays["owner_cell"]),
    )


def read_mesh_file(path) -> GridFile:
    try:
        with open(path, "r", encoding="ascii") as fh:
            return read_mesh(fh)
    except OSError as exc:
        raise InputError(f"cannot read mesh file {path}: {exc}") from exc
