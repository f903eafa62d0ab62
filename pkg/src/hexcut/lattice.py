"""Structured hexahedral lattice: geometry, global ids, adjacency.

Conventions used across the whole package:

* A lattice has ``dims = (nx, ny, nz)`` cells, ``origin`` and uniform
  ``spacing`` h.  Nodes sit on the (nx+1)(ny+1)(nz+1) grid points.
* Ids are dense integers, lexicographic with x fastest and z slowest:
  ``node(i,j,k) = i + (nx+1)*j + (nx+1)*(ny+1)*k`` and the analogous
  formula for cells.
* Edges are numbered in three axis blocks (all x-aligned edges first,
  then y, then z); faces in three orientation blocks (normal x, y, z).
* Within a cell, the 8 corners are ordered by local bits
  (bit0 -> +x, bit1 -> +y, bit2 -> +z), the 12 edges as four x-edges,
  four y-edges, four z-edges, and the 6 faces as x-min, x-max, y-min,
  y-max, z-min, z-max.

All functions validate ranges and raise :class:`hexcut.errors.InputError`
on out-of-range ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import InputError


class GlobalId(NamedTuple):
    """A typed global id; ``kind`` is one of node/edge/face/cell."""

    kind: str
    index: int


# Local corner order: bit0 -> +x, bit1 -> +y, bit2 -> +z.
CORNER_OFFSETS = tuple((c & 1, (c >> 1) & 1, (c >> 2) & 1) for c in range(8))

# Local edges as (corner, corner) pairs, lower corner first.
CELL_EDGE_CORNERS = (
    (0, 1), (2, 3), (4, 5), (6, 7),   # x-aligned
    (0, 2), (1, 3), (4, 6), (5, 7),   # y-aligned
    (0, 4), (1, 5), (2, 6), (3, 7),   # z-aligned
)

# Local faces: cyclic corner loops with outward normals.
CELL_FACE_CORNERS = (
    (0, 4, 6, 2),   # x-min, normal -x
    (1, 3, 7, 5),   # x-max, normal +x
    (0, 1, 5, 4),   # y-min, normal -y
    (2, 6, 7, 3),   # y-max, normal +y
    (0, 2, 3, 1),   # z-min, normal -z
    (4, 5, 7, 6),   # z-max, normal +z
)

_EDGE_BY_CORNERS = {frozenset(pair): e for e, pair in enumerate(CELL_EDGE_CORNERS)}

# For each local face, the four local edge indices along its corner loop.
CELL_FACE_EDGES = tuple(
    tuple(_EDGE_BY_CORNERS[frozenset((loop[s], loop[(s + 1) % 4]))] for s in range(4))
    for loop in CELL_FACE_CORNERS
)


@dataclass(frozen=True)
class HexLattice:
    """Axis-aligned structured lattice of hexahedral cells."""

    dims: tuple[int, int, int]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    spacing: float = 1.0

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 1:
            raise InputError(f"lattice dims must be >= 1, got {self.dims}")
        if not (self.spacing > 0.0 and np.isfinite(self.spacing)):
            raise InputError(f"lattice spacing must be positive, got {self.spacing}")
        if len(self.origin) != 3 or not all(np.isfinite(v) for v in self.origin):
            raise InputError(f"lattice origin must be 3 finite floats, got {self.origin}")

    # -- counts ---------------------------------------------------------

    @property
    def node_dims(self) -> tuple[int, int, int]:
        nx, ny, nz = self.dims
        return (nx + 1, ny + 1, nz + 1)

    @property
    def node_count(self) -> int:
        mx, my, mz = self.node_dims
        return mx * my * mz

    @property
    def cell_count(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def edge_counts(self) -> tuple[int, int, int]:
        """Edge counts per axis block (x-aligned, y-aligned, z-aligned)."""
        nx, ny, nz = self.dims
        return (
            nx * (ny + 1) * (nz + 1),
            (nx + 1) * ny * (nz + 1),
            (nx + 1) * (ny + 1) * nz,
        )

    @property
    def edge_count(self) -> int:
        return sum(self.edge_counts)

    @property
    def face_counts(self) -> tuple[int, int, int]:
        """Face counts per orientation block (normal x, y, z)."""
        nx, ny, nz = self.dims
        return (
            (nx + 1) * ny * nz,
            nx * (ny + 1) * nz,
            nx * ny * (nz + 1),
        )

    @property
    def face_count(self) -> int:
        return sum(self.face_counts)

    @property
    def volume(self) -> float:
        return self.cell_count * self.spacing**3

    # -- node ids -------------------------------------------------------

    def node_id(self, i: int, j: int, k: int) -> int:
        mx, my, mz = self.node_dims
        if not (0 <= i < mx and 0 <= j < my and 0 <= k < mz):
            raise InputError(f"node index {(i, j, k)} outside lattice {self.dims}")
        return i + mx * (j + my * k)

    def node_ijk(self, node: int) -> tuple[int, int, int]:
        mx, my, mz = self.node_dims
        if not (0 <= node < self.node_count):
            raise InputError(f"node id {node} out of range")
        i = node % mx
        rest = node // mx
        return (i, rest % my, rest // my)

    def node_position(self, node: int) -> np.ndarray:
        i, j, k = self.node_ijk(node)
        return np.asarray(self.origin) + self.spacing * np.array([i, j, k], dtype=float)

    def node_positions(self) -> np.ndarray:
        """Positions of all nodes, shape (node_count, 3), in node-id order."""
        mx, my, mz = self.node_dims
        k, j, i = np.meshgrid(np.arange(mz), np.arange(my), np.arange(mx), indexing="ij")
        ijk = np.stack([i, j, k], axis=-1).reshape(-1, 3)
        return np.asarray(self.origin) + self.spacing * ijk.astype(float)

    # -- cell ids -------------------------------------------------------

    def cell_id(self, ci: int, cj: int, ck: int) -> int:
        nx, ny, nz = self.dims
        if not (0 <= ci < nx and 0 <= cj < ny and 0 <= ck < nz):
            raise InputError(f"cell index {(ci, cj, ck)} outside lattice {self.dims}")
        return ci + nx * (cj + ny * ck)

    def cell_ijk(self, cell: int) -> tuple[int, int, int]:
        nx, ny, nz = self.dims
        if not (0 <= cell < self.cell_count):
            raise InputError(f"cell id {cell} out of range")
        ci = cell % nx
        rest = cell // nx
        return (ci, rest % ny, rest // ny)

    def cells(self) -> Iterator[int]:
        return iter(range(self.cell_count))

    def cell_nodes(self, cell: int) -> tuple[int, ...]:
        """Global node ids of the 8 corners, in local corner order."""
        ci, cj, ck = self.cell_ijk(cell)
        return tuple(
            self.node_id(ci + dx, cj + dy, ck + dz) for dx, dy, dz in CORNER_OFFSETS
        )

    # -- edge ids -------------------------------------------------------

    def edge_id(self, axis: int, i: int, j: int, k: int) -> int:
        """Global id of the edge starting at node (i,j,k) along ``axis``."""
        nx, ny, nz = self.dims
        ex, ey, ez = self.edge_counts
        if axis == 0:
            if not (0 <= i < nx and 0 <= j <= ny and 0 <= k <= nz):
                raise InputError(f"x-edge {(i, j, k)} outside lattice")
            return i + nx * (j + (ny + 1) * k)
        if axis == 1:
            if not (0 <= i <= nx and 0 <= j < ny and 0 <= k <= nz):
                raise InputError(f"y-edge {(i, j, k)} outside lattice")
            return ex + i + (nx + 1) * (j + ny * k)
        if axis == 2:
            if not (0 <= i <= nx and 0 <= j <= ny and 0 <= k < nz):
                raise InputError(f"z-edge {(i, j, k)} outside lattice")
            return ex + ey + i + (nx + 1) * (j + (ny + 1) * k)
        raise InputError(f"edge axis must be 0, 1 or 2, got {axis}")

    def edge_decode(self, edge: int) -> tuple[int, int, int, int]:
        """Inverse of :meth:`edge_id`: returns (axis, i, j, k)."""
        nx, ny, nz = self.dims
        ex, ey, ez = self.edge_counts
        if not (0 <= edge < self.edge_count):
            raise InputError(f"edge id {edge} out of range")
        if edge < ex:
            i = edge % nx
            rest = edge // nx
            return (0, i, rest % (ny + 1), rest // (ny + 1))
        if edge < ex + ey:
            e = edge - ex
            i = e % (nx + 1)
            rest = e // (nx + 1)
            return (1, i, rest % ny, rest // ny)
        e = edge - ex - ey
        i = e % (nx + 1)
        rest = e // (nx + 1)
        return (2, i, rest % (ny + 1), rest // (ny + 1))

    def edge_nodes(self, edge: int) -> tuple[int, int]:
        """Endpoint node ids, lower id first."""
        axis, i, j, k = self.edge_decode(edge)
        step = [(1, 0, 0), (0, 1, 0), (0, 0, 1)][axis]
        return (
            self.node_id(i, j, k),
            self.node_id(i + step[0], j + step[1], k + step[2]),
        )

    def cell_edges(self, cell: int) -> tuple[int, ...]:
        """Global edge ids of the 12 cell edges, in local edge order."""
        ci, cj, ck = self.cell_ijk(cell)
        out = []
        for dy, dz in ((0, 0), (1, 0), (0, 1), (1, 1)):
            out.append(self.edge_id(0, ci, cj + dy, ck + dz))
        for dx, dz in ((0, 0), (1, 0), (0, 1), (1, 1)):
            out.append(self.edge_id(1, ci + dx, cj, ck + dz))
        for dx, dy in ((0, 0), (1, 0), (0, 1), (1, 1)):
            out.append(self.edge_id(2, ci + dx, cj + dy, ck))
        return tuple(out)

    # -- face ids -------------------------------------------------------

    def face_id(self, normal: int, i: int, j: int, k: int) -> int:
        """Global id of a lattice face.

        For ``normal == 0`` the face sits at node-plane ``i`` and spans cell
        indices (j, k) in (y, z); the other orientations are analogous.
        """
        nx, ny, nz = self.dims
        fx, fy, fz = self.face_counts
        if normal == 0:
            if not (0 <= i <= nx and 0 <= j < ny and 0 <= k < nz):
                raise InputError(f"x-face {(i, j, k)} outside lattice")
            return i + (nx + 1) * (j + ny * k)
        if normal == 1:
            if not (0 <= i < nx and 0 <= j <= ny and 0 <= k < nz):
                raise InputError(f"y-face {(i, j, k)} outside lattice")
            return fx + i + nx * (j + (ny + 1) * k)
        if normal == 2:
            if not (0 <= i < nx and 0 <= j < ny and 0 <= k <= nz):
                raise InputError(f"z-face {(i, j, k)} outside lattice")
            return fx + fy + i + nx * (j + ny * k)
        raise InputError(f"face normal must be 0, 1 or 2, got {normal}")

    def face_decode(self, face: int) -> tuple[int, int, int, int]:
        nx, ny, nz = self.dims
        fx, fy, fz = self.face_counts
        if not (0 <= face < self.face_count):
            raise InputError(f"face id {face} out of range")
        if face < fx:
            i = face % (nx + 1)
            rest = face // (nx + 1)
            return (0, i, rest % ny, rest // ny)
        if face < fx + fy:
            f = face - fx
            i = f % nx
            rest = f // nx
            return (1, i, rest % (ny + 1), rest // (ny + 1))
        f = face - fx - fy
        i = f % nx
        rest = f // nx
        return (2, i, rest % ny, rest // ny)

    def cell_faces(self, cell: int) -> tuple[int, ...]:
        """Global face ids of the 6 cell faces, in local face order."""
        ci, cj, ck = self.cell_ijk(cell)
        return (
            self.face_id(0, ci, cj, ck),
            self.face_id(0, ci + 1, cj, ck),
            self.face_id(1, ci, cj, ck),
            self.face_id(1, ci, cj + 1, ck),
            self.face_id(2, ci, cj, ck),
            self.face_id(2, ci, cj, ck + 1),
        )

    def face_cells(self, face: int) -> tuple[int, ...]:
        """Ids of the 1 or 2 cells incident to a face."""
        normal, i, j, k = self.face_decode(face)
        nx, ny, nz = self.dims
        cells = []
        if normal == 0:
            if i > 0:
                cells.append(self.cell_id(i - 1, j, k))
            if i < nx:
                cells.append(self.cell_id(i, j, k))
        elif normal == 1:
            if j > 0:
                cells.append(self.cell_id(i, j - 1, k))
            if j < ny:
                cells.append(self.cell_id(i, j, k))
        else:
            if k > 0:
                cells.append(self.cell_id(i, j, k - 1))
            if k < nz:
                cells.append(self.cell_id(i, j, k))
        return tuple(cells)

    def is_boundary_face(self, face: int) -> bool:
        return len(self.face_cells(face)) == 1

    def interior_faces(self) -> Iterator[int]:
        for face in range(self.face_count):
            if not self.is_boundary_face(face):
                yield face

    def face_nodes(self, face: int) -> tuple[int, ...]:
        """The 4 corner node ids of a face in a fixed cyclic order.

        The cycle is intrinsic to the face (independent of which incident
        cell asks), so both neighbours of an interior face see the same
        loop.
        """
        normal, i, j, k = self.face_decode(face)
        if normal == 0:
            loop = ((0, 0), (0, 1), (1, 1), (1, 0))
            return tuple(self.node_id(i, j + a, k + b) for a, b in loop)
        if normal == 1:
            loop = ((0, 0), (1, 0), (1, 1), (0, 1))
            return tuple(self.node_id(i + a, j, k + b) for a, b in loop)
        loop = ((0, 0), (0, 1), (1, 1), (1, 0))
        return tuple(self.node_id(i + a, j + b, k) for a, b in loop)

    def cell_neighbors(self, cell: int) -> tuple[int, ...]:
        """Face-adjacent neighbour cells (up to 6)."""
        ci, cj, ck = self.cell_ijk(cell)
        nx, ny, nz = self.dims
        out = []
        for d, n in (((-1, 0, 0), ci > 0), ((1, 0, 0), ci < nx - 1),
                     ((0, -1, 0), cj > 0), ((0, 1, 0), cj < ny - 1),
                     ((0, 0, -1), ck > 0), ((0, 0, 1), ck < nz - 1)):
            if n:
                out.append(self.cell_id(ci + d[0], cj + d[1], ck + d[2]))
        return tuple(out)
