"""Nodal level set fields: construction, filtering, interpolation, crossings.

Sign convention: a node with value > 0 belongs to the solid phase, < 0 to
the void phase.  Exact zeros never survive ingestion: values with
``|v| < 1e-12 * spacing`` are snapped to ``+1e-12 * spacing``, so zero
ties resolve to solid once and for all and every later sign query is a
plain comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .lattice import HexLattice

SNAP_REL = 1e-12

SOLID = 1
VOID = -1


def snap_zeros(values: np.ndarray, spacing: float) -> np.ndarray:
    """Replace near-zero entries by a positive epsilon (ties to solid)."""
    eps = SNAP_REL * spacing
    out = np.array(values, dtype=float, copy=True)
    out[np.abs(out) < eps] = eps
    return out


@dataclass(frozen=True)
class LevelSetField:
    """Nodal level set values on a lattice, one float per node."""

    lattice: HexLattice
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.lattice.node_count,):
            raise InputError(
                f"field needs {self.lattice.node_count} nodal values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise InputError("field values must all be finite")
        object.__setattr__(self, "values", snap_zeros(vals, self.lattice.spacing))
        self.values.setflags(write=False)

    def sign(self, node: int) -> int:
        return SOLID if self.values[node] > 0.0 else VOID

    def signs(self) -> np.ndarray:
        """All nodal signs as an int8 array of +1 / -1."""
        return np.where(self.values > 0.0, 1, -1).astype(np.int8)

    def scaled(self, factor: float) -> "LevelSetField":
        if not factor > 0.0:
            raise InputError(f"scale factor must be positive, got {factor}")
        return LevelSetField(self.lattice, self.values * factor)


# -- trilinear interpolation ---------------------------------------------


def trilinear_weights(u: float, v: float, w: float) -> np.ndarray:
    """Shape weights for the 8 cell corners (local corner order) at (u,v,w)."""
    wu = (1.0 - u, u)
    wv = (1.0 - v, v)
    ww = (1.0 - w, w)
    return np.array([wu[c & 1] * wv[(c >> 1) & 1] * ww[(c >> 2) & 1] for c in range(8)])


def interpolate_trilinear(corner_values: Sequence[float], u: float, v: float, w: float) -> float:
    """Trilinear interpolant on the unit cell at local coords in [0,1]^3."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0 and 0.0 <= w <= 1.0):
        raise InputError(f"local coords {(u, v, w)} outside the unit cell")
    vals = np.asarray(corner_values, dtype=float)
    if vals.shape != (8,):
        raise InputError("trilinear interpolation needs 8 corner values")
    return float(np.dot(trilinear_weights(u, v, w), vals))


def interpolate_in_cell(fld: LevelSetField, cell: int, point: np.ndarray) -> float:
    """Interpolate the field at a global point lying inside ``cell``."""
    lat = fld.lattice
    ci, cj, ck = lat.cell_ijk(cell)
    base = np.asarray(lat.origin) + lat.spacing * np.array([ci, cj, ck], dtype=float)
    local = (np.asarray(point, dtype=float) - base) / lat.spacing
    local = np.clip(local, 0.0, 1.0)
    corner_vals = fld.values[list(lat.cell_nodes(cell))]
    return interpolate_trilinear(corner_vals, *local)


# -- edge crossings -------------------------------------------------------


def edge_crossing_t(fld: LevelSetField, edge: int) -> Optional[float]:
    """Parameter of the sign change on an edge, or None when both ends agree.

    Measured from the lower-id endpoint: t = v0 / (v0 - v1), always in (0,1)
    because ingestion removed exact zeros.
    """
    n0, n1 = fld.lattice.edge_nodes(edge)
    v0 = fld.values[n0]
    v1 = fld.values[n1]
    if (v0 > 0.0) == (v1 > 0.0):
        return None
    return float(v0 / (v0 - v1))


def edge_crossing_point(fld: LevelSetField, edge: int) -> Optional[np.ndarray]:
    """Global coordinates of the edge crossing, or None.

    Pure function of the global edge id, so every cell sharing the edge
    sees bit-identical coordinates.
    """
    t = edge_crossing_t(fld, edge)
    if t is None:
        return None
    n0, n1 = fld.lattice.edge_nodes(edge)
    p0 = fld.lattice.node_position(n0)
    p1 = fld.lattice.node_position(n1)
    return p0 + t * (p1 - p0)


# -- primitive scenes -----------------------------------------------------


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float

    def local_field(self, points: np.ndarray) -> np.ndarray:
        d = np.linalg.norm(points - np.asarray(self.center), axis=-1)
        return self.radius - d


@dataclass(frozen=True)
class Cuboid:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def local_field(self, points: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        inside = np.minimum(points - lo, hi - points)
        return inside.min(axis=-1)


@dataclass(frozen=True)
class ScenePrimitive:
    shape: object          # Sphere or Cuboid
    sense: str             # "solid" or "void"

    def __post_init__(self):
        if self.sense not in ("solid", "void"):
            raise InputError(f"primitive sense must be solid or void, got {self.sense!r}")


@dataclass(frozen=True)
class PrimitiveScene:
    """Left-to-right composition of signed primitives over a background.

    A solid primitive raises the field via max(phi, local); a void one
    lowers it via min(phi, -local).  The background starts the running
    field at +/- the domain diagonal so primitives always win locally.
    """

    primitives: tuple[ScenePrimitive, ...]
    background: str = "solid"

    def __post_init__(self):
        if self.background not in ("solid", "void"):
            raise InputError(f"background must be solid or void, got {self.background!r}")

    def evaluate(self, points: np.ndarray, domain_diagonal: float) -> np.ndarray:
        phi = np.full(points.shape[:-1], domain_diagonal, dtype=float)
        if self.background == "void":
            phi = -phi
        for prim in self.primitives:
            local = prim.shape.local_field(points)
            if prim.sense == "solid":
                phi = np.maximum(phi, local)
            else:
                phi = np.minimum(phi, -local)
        return phi


def sample_scene(lattice: HexLattice, scene: PrimitiveScene) -> LevelSetField:
    """Evaluate a primitive scene at every lattice node."""
    pts = lattice.node_positions()
    nx, ny, nz = lattice.dims
    diag = lattice.spacing * math.sqrt(nx * nx + ny * ny + nz * nz)
    return LevelSetField(lattice, scene.evaluate(pts, diag))


# -- linear distance filter ------------------------------------------------


@dataclass(frozen=True)
class FilterSpec:
    """Linear distance filter with radius and optional clamping bounds.

    Node i gets sum_j w_ij s_j / sum_j w_ij with hat weights
    w_ij = max(0, radius - |X_i - X_j|) over lattice nodes j.
    """

    radius: float
    clamp_low: Optional[float] = None
    clamp_high: Optional[float] = None

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InputError(f"filter radius must be positive, got {self.radius}")
        if (
            self.clamp_low is not None
            and self.clamp_high is not None
            and self.clamp_low > self.clamp_high
        ):
            raise InputError("filter clamp_low must not exceed clamp_high")


def reference_filter_radius(spacing: float) -> float:
    """The reference filter radius of 1.8 cell spacings."""
    return 1.8 * spacing


def apply_filter(lattice: HexLattice, design: np.ndarray, spec: FilterSpec) -> LevelSetField:
    """Filter raw nodal design values into a smoothed level set field.

    Weights depend only on index offsets on a uniform lattice, so the sum
    runs over a precomputed offset stencil; boundary nodes renormalize by
    the weights of the neighbours that exist.  Clamping (when configured)
    happens before the zero snap that field ingestion performs.
    """
    vals = np.asarray(design, dtype=float)
    if vals.shape != (lattice.node_count,):
        raise InputError(
            f"filter needs {lattice.node_count} design values, got shape {vals.shape}"
        )
    mx, my, mz = lattice.node_dims
    grid = vals.reshape(mz, my, mx)     # indexed [k, j, i]

    h = lattice.spacing
    reach = int(math.ceil(spec.radius / h - 1e-12)) - 1
    reach = max(reach, 0)
    num = np.zeros_like(grid)
    den = np.zeros_like(grid)
    for dk in range(-reach, reach + 1):
        for dj in range(-reach, reach + 1):
            for di in range(-reach, reach + 1):
                w = spec.radius - h * math.sqrt(di * di + dj * dj + dk * dk)
                if w <= 0.0:
                    continue
                src_k = slice(max(0, dk), mz + min(0, dk))
                src_j = slice(max(0, dj), my + min(0, dj))
                src_i = slice(max(0, di), mx + min(0, di))
                dst_k = slice(max(0, -dk), mz + min(0, -dk))
                dst_j = slice(max(0, -dj), my + min(0, -dj))
                dst_i = slice(max(0, -di), mx + min(0, -di))
                num[dst_k, dst_j, dst_i] += w * grid[src_k, src_j, src_i]
                den[dst_k, dst_j, dst_i] += w
    filtered = num / den
    if spec.clamp_low is not None:
        filtered = np.maximum(filtered, spec.clamp_low)
    if spec.clamp_high is not None:
        filtered = np.minimum(filtered, spec.clamp_high)
    return LevelSetField(lattice, filtered.reshape(-1))
