"""Cut-cell tetrahedralization of intersected lattice cells.

Every intersected cell is decomposed into tetrahedra whose vertices are
cell corners and edge crossings only.  The decomposition satisfies, per
cell:

(a) tet volumes sum to the cell volume,
(b) tet interiors are pairwise disjoint,
(c) no tet mixes solid and void corners,
(d) the triangle pattern induced on each lattice face is a pure function
    of that face's global ids, so adjacent cells tile shared faces
    identically,
(e) triangles whose vertices are all crossings separate opposite corner
    signs or bound an ambiguous tet.

Construction: the six faces are triangulated first from face-local data
(sign arcs fanned from their smallest vertex id, plus the central
crossing quad on double-diagonal faces), then the interior is filled by
a deterministic advancing-front search over the cell's vertex set.  The
front bookkeeping guarantees that a completed fill is a genuine
partition: all tets positively oriented, every internal triangle shared
by exactly two tets from opposite sides, boundary triangles matching the
face pattern, and the volume sum checked against the cell volume.

Ambiguous tets (ATs) have four crossing vertices.  A boundary ambiguous
tet (BAT) additionally has one triangle on a lattice face; the search
forces the two tets over every central-quad triangle to be ATs, so BATs
always appear in matched pairs across interior faces.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegeneracyError, InputError
from .field import LevelSetField, edge_crossing_t
from .lattice import (
    CELL_EDGE_CORNERS,
    CELL_FACE_CORNERS,
    CELL_FACE_EDGES,
    CORNER_OFFSETS,
    HexLattice,
)

UNAMBIGUOUS = 0
IAT = 1
BAT = 2

_SUM_RTOL = 1e-9


class VertexRef(NamedTuple):
    """Provenance-tagged vertex: a lattice corner or an edge crossing."""

    kind: str      # "corner" -> index is a node id, "crossing" -> an edge id
    index: int


@dataclass(frozen=True)
class Tet:
    """One tetrahedron of a cut cell."""

    owner_cell: int
    verts: tuple[VertexRef, VertexRef, VertexRef, VertexRef]
    coords: np.ndarray                 # (4, 3) global coordinates
    corner_sign: int                   # +1 / -1 from corner vertices, 0 for ATs
    tag: int                           # UNAMBIGUOUS / IAT / BAT
    bat_face: Optional[int]            # lattice face id carrying the BAT triangle
    volume: float


@dataclass
class CellResult:
    """Decomposition of one intersected cell."""

    cell: int
    code: int
    tets: list[Tet]
    face_triangles: dict[int, tuple[frozenset, ...]]   # local face -> triangle keys


@dataclass
class CutCellMesh:
    """Whole-lattice decomposition: tets for intersected cells, signs elsewhere."""

    lattice: HexLattice
    field: LevelSetField
    tets: list[Tet]
    uniform_cells: dict[int, int]                      # cell id -> +1 / -1
    cell_tets: dict[int, tuple[int, int]]              # cell id -> tet index range
    cell_codes: dict[int, int]
    face_triangles: dict[tuple[int, int], tuple[frozenset, ...]]
    _facet_cache: Optional[dict] = dc_field(default=None, init=False, repr=False)
    _tet_facet_cache: Optional[tuple] = dc_field(default=None, init=False, repr=False)
    _face_facet_cache: Optional[tuple] = dc_field(default=None, init=False, repr=False)

    def tet_facets(self) -> tuple[tuple[frozenset, ...], ...]:
        """The four triangle keys of every tet, in tet order."""
        if self._tet_facet_cache is None:
            rows = []
            for tet in self.tets:
                v = tet.verts
                rows.append(tuple(
                    frozenset(v[i] for i in range(4) if i != skip)
                    for skip in range(4)
                ))
            self._tet_facet_cache = tuple(rows)
        return self._tet_facet_cache

    def facet_map(self) -> dict[frozenset, list[int]]:
        """Triangle key -> indices of incident tets (1 or 2 entries)."""
        if self._facet_cache is None:
            out: dict[frozenset, list[int]] = {}
            for idx, facets in enumerate(self.tet_facets()):
                for key in facets:
                    out.setdefault(key, []).append(idx)
            self._facet_cache = out
        return self._facet_cache

    def lattice_face_triangles(self) -> tuple:
        """(face, key, incident tets, uniform neighbour sign) per triangle
        on an interior lattice face, each triangle listed once.

        ``uniform_sign`` is None when both incident cells are tessellated.
        Phase-independent, so it is computed once per mesh and shared by
        every resolution built on top.
        """
        if self._face_facet_cache is None:
            lat = self.lattice
            fmap = self.facet_map()
            seen: set[tuple[int, frozenset]] = set()
            rows = []
            for (cell, local_face), keys in self.face_triangles.items():
                face = lat.cell_faces(cell)[local_face]
                incident_cells = lat.face_cells(face)
                if len(incident_cells) == 1:
                    continue
                other = incident_cells[0] if incident_cells[1] == cell else incident_cells[1]
                uniform_sign = self.uniform_cells.get(other)
                for key in keys:
                    tag = (face, key)
                    if tag in seen:
                        continue
                    seen.add(tag)
                    rows.append((face, key, tuple(fmap[key]), uniform_sign))
            self._face_facet_cache = tuple(rows)
        return self._face_facet_cache

    @property
    def at_indices(self) -> list[int]:
        return [i for i, t in enumerate(self.tets) if t.tag != UNAMBIGUOUS]


# -- geometric kernels -----------------------------------------------------


def _orient(pa, pb, pc, pd) -> float:
    """Signed volume times six of the tet (pa, pb, pc, pd)."""
    adx = pa[0] - pd[0]
    ady = pa[1] - pd[1]
    adz = pa[2] - pd[2]
    bdx = pb[0] - pd[0]
    bdy = pb[1] - pd[1]
    bdz = pb[2] - pd[2]
    cdx = pc[0] - pd[0]
    cdy = pc[1] - pd[1]
    cdz = pc[2] - pd[2]
    return (
        adx * (bdy * cdz - bdz * cdy)
        - ady * (bdx * cdz - bdz * cdx)
        + adz * (bdx * cdy - bdy * cdx)
    )


def _axis_collinear_pairs(pa, pb, pc, pd) -> bool:
    """True when two point pairs sit on axis-parallel lattice lines of the
    same axis, which forces exact coplanarity.

    Corners and crossings carry exact 0/1 coordinates transverse to their
    edge, so points on one lattice line share those two coordinates
    bit-for-bit.  Two pairs parallel to the same axis span parallel lines
    (coplanar four points); two pairs sharing a point make three collinear
    points.  Either way the determinant is exactly zero.
    """
    pts = (pa, pb, pc, pd)
    for u, v in ((1, 2), (0, 2), (0, 1)):
        n = 0
        for s in range(3):
            ps = pts[s]
            for t in range(s + 1, 4):
                pt = pts[t]
                if ps[u] == pt[u] and ps[v] == pt[v]:
                    n += 1
        if n >= 2:
            return True
    return False


def _orient_sign(pa, pb, pc, pd) -> int:
    """Exact sign of ``_orient`` (+1, -1, or 0 for truly coplanar points).

    The float determinant is trusted outside a forward error bound; inside
    it, cheap combinatorial tests recognize the lattice-aligned degenerate
    layouts, and rational arithmetic arbitrates whatever remains.  Snapped
    field zeros put crossings within ~1e-12 of a corner, and the sliver
    tets that fill such gaps are thinner than any fixed float tolerance,
    so an exact fallback is the only safe arbiter there.
    """
    adx = pa[0] - pd[0]
    ady = pa[1] - pd[1]
    adz = pa[2] - pd[2]
    bdx = pb[0] - pd[0]
    bdy = pb[1] - pd[1]
    bdz = pb[2] - pd[2]
    cdx = pc[0] - pd[0]
    cdy = pc[1] - pd[1]
    cdz = pc[2] - pd[2]
    det = (
        adx * (bdy * cdz - bdz * cdy)
        - ady * (bdx * cdz - bdz * cdx)
        + adz * (bdx * cdy - bdy * cdx)
    )
    # callers pass unit-cell coordinates, so the permanent of the difference
    # matrix is at most 6 and 2e-14 * (1 + 6) bounds the float error
    if det > 1.4e-13:
        return 1
    if det < -1.4e-13:
        return -1
    # a zero difference column means all four points share an axis plane
    # (the common case: they lie on one cube face); exactly coplanar
    if (
        (adx == 0.0 and bdx == 0.0 and cdx == 0.0)
        or (ady == 0.0 and bdy == 0.0 and cdy == 0.0)
        or (adz == 0.0 and bdz == 0.0 and cdz == 0.0)
    ):
        return 0
    if _axis_collinear_pairs(pa, pb, pc, pd):
        return 0
    ad = [Fraction(pa[i]) - Fraction(pd[i]) for i in range(3)]
    bd = [Fraction(pb[i]) - Fraction(pd[i]) for i in range(3)]
    cd = [Fraction(pc[i]) - Fraction(pd[i]) for i in range(3)]
    exact = (
        ad[0] * (bd[1] * cd[2] - bd[2] * cd[1])
        - ad[1] * (bd[0] * cd[2] - bd[2] * cd[0])
        + ad[2] * (bd[0] * cd[1] - bd[1] * cd[0])
    )
    return (exact > 0) - (exact < 0)


def tet_volume(coords) -> float:
    return abs(_orient(coords[0], coords[1], coords[2], coords[3])) / 6.0


def _sort3(x, y, z) -> tuple:
    """Ascending tuple of three comparables, without list round-trips."""
    if x > y:
        x, y = y, x
    if y > z:
        y, z = z, y
        if x > y:
            x, y = y, x
    return (x, y, z)


def facet_area(tet: Tet, facet: frozenset) -> float:
    """Area of one triangular facet of ``tet``, given as a key of 3 vertex refs."""
    p0, p1, p2 = (tet.coords[tet.verts.index(r)] for r in facet)
    return 0.5 * float(np.linalg.norm(np.cross(p1 - p0, p2 - p0)))


# -- face triangulation ----------------------------------------------------


def triangulate_face(cycle, signs, side_crossings):
    """Triangulate one lattice face from face-local data.

    ``cycle`` holds 4 vertex refs in cyclic order, ``signs`` their signs,
    and ``side_crossings[s]`` the crossing ref on the edge between cycle
    corners s and s+1 (or None).  Triangles keep the winding of the input
    cycle.  Returns a list of (triangle, is_central) pairs.

    The face boundary is walked in cyclic order and split at crossings
    into arcs of same-sign corners; each arc, capped by its bounding
    crossings, is a convex polygon fanned from a pivot that both cells
    sharing the face agree on: the middle corner for a five-vertex arc,
    the smallest vertex ref otherwise.  (Fanning five-vertex arcs from
    the smallest ref can leave the cell interior with no conforming
    tetrahedralization on corner-cut cells; the middle corner avoids
    that.)  A four-crossing face leaves the central crossing quad,
    fanned from its smallest ref; those triangles are the only
    all-crossing face triangles.
    """
    n_cross = sum(1 for c in side_crossings if c is not None)
    if n_cross == 0:
        poly = list(cycle)
        return [(tri, False) for tri in _fan(poly)]

    # boundary loop with crossings spliced in, remembering crossing slots
    loop = []
    for s in range(4):
        loop.append(("corner", s))
        if side_crossings[s] is not None:
            loop.append(("crossing", s))
    # rotate so the loop starts right after a crossing
    start = next(i for i, item in enumerate(loop) if item[0] == "crossing") + 1
    loop = loop[start:] + loop[:start]

    pieces = []
    arc = [loop[-1]]      # the crossing that closed the previous arc starts this one
    for item in loop:
        arc.append(item)
        if item[0] == "crossing":
            pieces.append(arc)
            arc = [item]

    tris = []
    for piece in pieces:
        poly = [
            cycle[idx] if kind == "corner" else side_crossings[idx]
            for kind, idx in piece
        ]
        # a five-vertex arc is crossing, corner, corner, corner, crossing;
        # its middle corner is the same vertex from either side of the face
        pivot = 2 if len(poly) == 5 else None
        tris.extend((tri, False) for tri in _fan(poly, pivot))
    if n_cross == 4:
        quad = [side_crossings[s] for s in range(4)]
        tris.extend((tri, True) for tri in _fan(quad))
    return tris


def _fan(poly, pivot=None):
    """Fan a convex polygon (list of refs, cyclic order) from one vertex.

    ``pivot`` is an index into ``poly``; by default the min ref is used.
    """
    if len(poly) < 3:
        raise InputError("cannot fan a polygon with fewer than 3 vertices")
    if pivot is None:
        pivot = min(range(len(poly)), key=lambda i: poly[i])
    rot = poly[pivot:] + poly[:pivot]
    return [(rot[0], rot[i], rot[i + 1]) for i in range(1, len(poly) - 1)]


# -- per-cell advancing-front fill ------------------------------------------


class _CellFill:
    """Deterministic advancing-front tetrahedralization of one cell."""

    def __init__(self, cell, code, refs, coords, signs, boundary, face_members,
                 central_keys, boundary_keys, face_key_sets):
        self.cell = cell
        self.code = code
        self.refs = refs                  # local index -> VertexRef
        self.coords = coords              # local index -> (x, y, z) unit coords
        self.signs = signs                # local index -> +1/-1 corners, 0 crossings
        self.nverts = len(refs)
        self.boundary = boundary          # list of (triple, closed_kind)
        self.face_members = face_members  # local face -> frozenset of local indices
        self.central_keys = central_keys  # facet keys of central-quad triangles
        self.boundary_keys = boundary_keys
        self.face_key_sets = face_key_sets
        self._orient_memo: dict = {}
        self._sign_memo: dict = {}
        self.steps = 0

    # orientation with memoization on local indices
    def orient(self, i, j, k, l) -> float:
        key = (i, j, k, l)
        val = self._orient_memo.get(key)
        if val is None:
            c = self.coords
            val = _orient(c[i], c[j], c[k], c[l])
            self._orient_memo[key] = val
        return val

    def orient_sign(self, i, j, k, l) -> int:
        # keyed on the ordered quadruple: callers repeat exact orderings
        # during backtracking, and an int key beats canonical sorting
        key = ((i << 15) | (j << 10) | (k << 5)) | l
        val = self._sign_memo.get(key)
        if val is None:
            c = self.coords
            val = _orient_sign(c[i], c[j], c[k], c[l])
            self._sign_memo[key] = val
        return val

    def _seed(self) -> dict:
        seed: dict = {}
        for triple, kind in self.boundary:
            key = _sort3(*triple)
            if key in seed:
                raise DegeneracyError(
                    "duplicate boundary triangle", cell_id=self.cell, detail=key
                )
            seed[key] = (triple, kind)
        return seed

    def run(self, budget=200000):
        seed = self._seed()
        # cheap pass first: expanding the lexicographic min facet suffices for
        # nearly every cell; the fewest-candidates scan backs it up on cells
        # whose skewed crossings make that ordering wander
        for self._fail_first, self.budget in ((False, min(2000, budget)), (True, budget)):
            self.steps = 0
            tets: list = []
            try:
                if self._fill(dict(seed), set(), tets):
                    return tets
            except DegeneracyError:
                if self._fail_first:
                    raise
        raise DegeneracyError(
            f"cell fill failed for sign pattern {self.code:#010b}",
            cell_id=self.cell,
            detail={"code": self.code},
        )

    def replay(self, template):
        """Re-enact a recorded fill sequence against this cell's geometry.

        A template records, per placed tet, the expanded facet key and the
        apex vertex.  Cells sharing a sign code have identical local vertex
        layouts and identical combinatorial state sequences, so only the
        geometry-dependent conditions need re-checking: facet orientation,
        witness sides of closed neighbours, and vertex containment.  Any
        failure returns None and the caller falls back to the search.
        """
        frontier = dict(self._seed())
        closed: set = set()
        tets: list = []
        osign = self.orient_sign
        for key, v in template:
            entry = frontier.get(key)
            if entry is None:
                return None
            triple, kind = entry
            a, b, c = triple
            if osign(a, b, c, v) <= 0:
                return None
            ok = True
            for nf, w in zip(((a, b, v), (b, c, v), (c, a, v)), (c, a, b)):
                nk = _sort3(*nf)
                entry2 = frontier.get(nk)
                if entry2 is not None and osign(*entry2[0], w) <= 0:
                    ok = False
                    break
            if not ok or self._contains_any(a, b, c, v):
                return None
            self._place(key, triple, v, frontier, closed, tets)
        if frontier:
            return None
        return tets

    def _contains_any(self, a, b, c, v) -> bool:
        osign = self.orient_sign
        for w in range(self.nverts):
            if w == v or w == a or w == b or w == c:
                continue
            if (
                osign(a, b, c, w) > 0
                and osign(a, b, w, v) > 0
                and osign(b, c, w, v) > 0
                and osign(c, a, w, v) > 0
            ):
                return True
        return False

    def _fill(self, frontier, closed, tets) -> bool:
        if not frontier:
            return True
        self.steps += 1
        if self.steps > self.budget:
            raise DegeneracyError(
                "cell fill exceeded its search budget",
                cell_id=self.cell,
                detail={"code": self.code},
            )
        if self._fail_first:
            # expand the facet with the fewest legal continuations, so dead
            # ends surface immediately instead of deep in the tree
            best = None
            cap = None
            for key in sorted(frontier):
                triple, kind = frontier[key]
                pairs = self._candidates(key, triple, kind, frontier, closed, cap)
                if not pairs:
                    return False
                if best is None or len(pairs) < len(best[3]):
                    best = (key, triple, kind, pairs)
                    if len(pairs) == 1:
                        break
                    cap = len(best[3])
            key, triple, kind, pairs = best
        else:
            key = min(frontier)
            triple, kind = frontier[key]
            pairs = self._candidates(key, triple, kind, frontier, closed)
        for v in self._rank(key, kind, pairs):
            ops = self._place(key, triple, v, frontier, closed, tets)
            if self._fill(frontier, closed, tets):
                return True
            self._unplace(ops, frontier, closed, tets)
        return False

    def _tet_sign(self, key, v) -> int:
        s = self.signs[v]
        for i in key:
            si = self.signs[i]
            if si:
                if s and si != s:
                    return 9         # mixed, impossible candidate
                s = si
        return s

    def _candidates(self, key, triple, kind, frontier, closed, cap=None):
        """Legal apex vertices for one frontier facet, as (v, closures) pairs.

        ``cap`` stops the enumeration once that many survivors are found;
        the fewest-candidates scan only needs counts up to its current
        best, while emptiness detection still sees the whole loop.
        """
        facet_all_crossing = all(self.signs[i] == 0 for i in key)
        central = kind[0] == "face" and kind[2]
        out = []
        a, b, c = triple
        osign = self.orient_sign
        above = None
        for v in range(self.nverts):
            if v in key:
                continue
            g = self._tet_sign(key, v)
            if g == 9:
                continue
            if central and self.signs[v] != 0:
                continue
            if (
                facet_all_crossing
                and kind[0] == "tet"
                and kind[1] != 0
                and self.signs[v] == kind[1]
            ):
                continue      # would wedge an interface-looking triangle inside a phase
            if osign(a, b, c, v) <= 0:
                continue
            new_facets = ((a, b, v), (b, c, v), (c, a, v))
            witnesses = (c, a, b)
            ok = True
            closures = 0
            for nf, w in zip(new_facets, witnesses):
                nk = _sort3(*nf)
                if nk in closed:
                    ok = False
                    break
                entry = frontier.get(nk)
                if entry is not None:
                    s_triple, s_kind = entry
                    if osign(*s_triple, w) <= 0:
                        ok = False     # tet sits on the already-closed side
                        break
                    if s_kind[0] == "face" and s_kind[2] and g != 0:
                        ok = False     # central triangles must bound ATs
                        break
                    if (
                        s_kind[0] == "tet"
                        and s_kind[1] != 0
                        and s_kind[1] == g
                        and all(self.signs[i] == 0 for i in nk)
                    ):
                        ok = False     # same-phase tets across an all-crossing facet
                        break
                    closures += 1
                else:
                    if self._alien_boundary_facet(nk):
                        ok = False
                        break
            if not ok:
                continue
            # reject tets that strictly contain another vertex; the facet's
            # open half-space is shared by every candidate, so filter once
            if above is None:
                above = [
                    w for w in range(self.nverts)
                    if w not in key and osign(a, b, c, w) > 0
                ]
            contained = False
            for w in above:
                if w == v:
                    continue
                if (
                    osign(a, b, w, v) > 0
                    and osign(b, c, w, v) > 0
                    and osign(c, a, w, v) > 0
                ):
                    contained = True
                    break
            if contained:
                continue
            out.append((v, closures))
            if cap is not None and len(out) >= cap:
                break
        return out

    def _rank(self, key, kind, pairs):
        """Order enumerated candidates, most promising first."""
        facet_all_crossing = all(self.signs[i] == 0 for i in key)

        def rank(item):
            v, closures = item
            if facet_all_crossing:
                group = 0 if self.signs[v] == 0 else 1
                if group == 0:
                    sub = self._dist2_to_centroid(key, v)
                else:
                    sub = 0.0
            else:
                group = 0 if self.signs[v] != 0 else 1
                sub = 0.0 if group == 0 else self._dist2_to_centroid(key, v)
            return (-closures, group, sub, self.refs[v])

        return [v for v, _ in sorted(pairs, key=rank)]

    def _dist2_to_centroid(self, key, v) -> float:
        c = self.coords
        cx = (c[key[0]][0] + c[key[1]][0] + c[key[2]][0]) / 3.0
        cy = (c[key[0]][1] + c[key[1]][1] + c[key[2]][1]) / 3.0
        cz = (c[key[0]][2] + c[key[1]][2] + c[key[2]][2]) / 3.0
        p = c[v]
        return (p[0] - cx) ** 2 + (p[1] - cy) ** 2 + (p[2] - cz) ** 2

    def _alien_boundary_facet(self, nk) -> bool:
        """A new facet lying on a lattice face but absent from its pattern."""
        if nk in self.boundary_keys:
            return False
        for members in self.face_key_sets:
            if nk[0] in members and nk[1] in members and nk[2] in members:
                return True
        return False

    def _place(self, key, triple, v, frontier, closed, tets):
        a, b, c = triple
        g = self._tet_sign(key, v)
        removed = [(key, frontier.pop(key))]
        added = []
        now_closed = [key]
        for nf, w in zip(((a, b, v), (b, c, v), (c, a, v)), (c, a, b)):
            nk = _sort3(*nf)
            entry = frontier.get(nk)
            if entry is not None:
                removed.append((nk, frontier.pop(nk)))
                now_closed.append(nk)
            else:
                frontier[nk] = (nf, ("tet", g))
                added.append(nk)
        closed.update(now_closed)
        tets.append(((a, b, c, v), g))
        return (removed, added, now_closed)

    def _unplace(self, ops, frontier, closed, tets):
        removed, added, now_closed = ops
        tets.pop()
        closed.difference_update(now_closed)
        for nk in added:
            del frontier[nk]
        for key, entry in removed:
            frontier[key] = entry


# -- cell decomposition ------------------------------------------------------


def _cell_context(lattice: HexLattice, fld: LevelSetField, cell: int,
                  crossing_ts: dict[int, float]):
    nodes = lattice.cell_nodes(cell)
    edges = lattice.cell_edges(cell)
    signs8 = [1 if fld.values[n] > 0.0 else -1 for n in nodes]
    code = 0
    for cidx, s in enumerate(signs8):
        if s > 0:
            code |= 1 << cidx

    refs: list[VertexRef] = [VertexRef("corner", n) for n in nodes]
    coords: list[tuple] = [tuple(float(x) for x in off) for off in CORNER_OFFSETS]
    signs: list[int] = list(signs8)
    local_of: dict[VertexRef, int] = {r: i for i, r in enumerate(refs)}

    crossing_ref_by_local_edge: list[Optional[VertexRef]] = []
    for le, edge in enumerate(edges):
        lo, hi = CELL_EDGE_CORNERS[le]
        if signs8[lo] == signs8[hi]:
            crossing_ref_by_local_edge.append(None)
            continue
        t = crossing_ts[edge]
        ref = VertexRef("crossing", edge)
        p0 = CORNER_OFFSETS[lo]
        p1 = CORNER_OFFSETS[hi]
        coords.append(tuple(p0[d] + t * (p1[d] - p0[d]) for d in range(3)))
        refs.append(ref)
        signs.append(0)
        local_of[ref] = len(refs) - 1
        crossing_ref_by_local_edge.append(ref)

    boundary = []
    central_keys = set()
    boundary_keys = set()
    face_members = []
    face_tris: dict[int, list] = {f: [] for f in range(6)}
    for f in range(6):
        loop = CELL_FACE_CORNERS[f]
        cyc_refs = [refs[c] for c in loop]
        cyc_signs = [signs8[c] for c in loop]
        side_cross = [crossing_ref_by_local_edge[e] for e in CELL_FACE_EDGES[f]]
        members = {local_of[r] for r in cyc_refs}
        members.update(local_of[r] for r in side_cross if r is not None)
        face_members.append(frozenset(members))
        for tri, is_central in triangulate_face(cyc_refs, cyc_signs, side_cross):
            # outward winding puts the positive-orient side on the cell
            # interior, which is where the front is open
            triple = tuple(local_of[r] for r in tri)
            key = tuple(sorted(triple))
            boundary.append((triple, ("face", f, is_central)))
            boundary_keys.add(key)
            if is_central:
                central_keys.add(key)
            face_tris[f].append(frozenset(tri))

    fill = _CellFill(
        cell, code, refs, coords, signs, boundary, face_members,
        central_keys, boundary_keys, face_members,
    )
    return fill, face_tris, local_of


# Fill sequences recorded from unit-magnitude cells, keyed by sign code.
# A template is a pure function of the code, so replaying it keeps the
# decomposition a pure per-cell function (worker count and call history
# cannot influence the result).
_TEMPLATES: dict[int, tuple] = {}


def _fill_template(code: int) -> tuple:
    tpl = _TEMPLATES.get(code)
    if tpl is None:
        lat = HexLattice(dims=(1, 1, 1))
        vals = np.array([1.0 if code >> c & 1 else -1.0 for c in range(8)])
        unit = LevelSetField(lat, vals)
        ts, _ = field_crossings(unit)
        fill, _, _ = _cell_context(lat, unit, 0, ts)
        tpl = tuple((_sort3(a, b, c), v) for (a, b, c, v), _ in fill.run())
        _TEMPLATES[code] = tpl
    return tpl


def tessellate_cell(lattice: HexLattice, fld: LevelSetField, cell: int,
                    crossing_ts: dict[int, float],
                    crossing_points: dict[int, np.ndarray]) -> CellResult:
    """Decompose one intersected cell into tagged tets with global coords."""
    fill, face_tris, _ = _cell_context(lattice, fld, cell, crossing_ts)
    raw = fill.replay(_fill_template(fill.code))
    if raw is None:
        raw = fill.run()

    h3 = lattice.spacing ** 3
    total = 0.0
    for (a, b, c, v), _ in raw:
        total += abs(fill.orient(a, b, c, v)) / 6.0
    if abs(total - 1.0) > _SUM_RTOL:
        raise DegeneracyError(
            f"cell volume defect {total - 1.0:.3e} after fill",
            cell_id=cell,
            detail={"code": fill.code},
        )

    node_pos = {n: lattice.node_position(n) for n in lattice.cell_nodes(cell)}
    faces = lattice.cell_faces(cell)
    face_member_refs = []
    for f in range(6):
        face_member_refs.append(frozenset(fill.refs[i] for i in fill.face_members[f]))

    tets = []
    for (a, b, c, v), g in raw:
        quad = (a, b, c, v)
        verts = tuple(fill.refs[i] for i in quad)
        pts = np.empty((4, 3), dtype=float)
        for row, ref in enumerate(verts):
            if ref.kind == "corner":
                pts[row] = node_pos[ref.index]
            else:
                pts[row] = crossing_points[ref.index]
        vol = tet_volume(pts)
        tag = UNAMBIGUOUS
        bat_face = None
        if g == 0:
            tag = IAT
            vset = set(verts)
            for f in range(6):
                for skip in range(4):
                    facet = {verts[i] for i in range(4) if i != skip}
                    if facet <= face_member_refs[f]:
                        tag = BAT
                        bat_face = faces[f]
                        break
                if bat_face is not None:
                    break
        tets.append(
            Tet(
                owner_cell=cell,
                verts=verts,
                coords=pts,
                corner_sign=g,
                tag=tag,
                bat_face=bat_face,
                volume=vol,
            )
        )
    return CellResult(
        cell=cell,
        code=fill.code,
        tets=tets,
        face_triangles={f: tuple(tris) for f, tris in face_tris.items()},
    )


# -- whole-field decomposition ------------------------------------------------


def field_crossings(fld: LevelSetField):
    """t parameter and global coordinates for every sign-change edge."""
    lat = fld.lattice
    signs = fld.values > 0.0
    ts: dict[int, float] = {}
    points: dict[int, np.ndarray] = {}
    for edge in range(lat.edge_count):
        n0, n1 = lat.edge_nodes(edge)
        if signs[n0] == signs[n1]:
            continue
        t = edge_crossing_t(fld, edge)
        ts[edge] = t
        p0 = lat.node_position(n0)
        p1 = lat.node_position(n1)
        points[edge] = p0 + t * (p1 - p0)
    return ts, points


def cell_sign_code(fld: LevelSetField, cell: int) -> int:
    code = 0
    for cidx, n in enumerate(fld.lattice.cell_nodes(cell)):
        if fld.values[n] > 0.0:
            code |= 1 << cidx
    return code


def decompose(fld: LevelSetField, workers: int = 1) -> CutCellMesh:
    """Decompose every intersected cell of a field.

    The result is independent of ``workers``: cells are processed by a
    pure per-cell function and reassembled in cell order.
    """
    if workers < 1:
        raise InputError(f"workers must be >= 1, got {workers}")
    lat = fld.lattice
    crossing_ts, crossing_points = field_crossings(fld)

    uniform: dict[int, int] = {}
    intersected: list[int] = []
    codes: dict[int, int] = {}
    for cell in lat.cells():
        code = cell_sign_code(fld, cell)
        codes[cell] = code
        if code == 0:
            uniform[cell] = -1
        elif code == 0xFF:
            uniform[cell] = 1
        else:
            intersected.append(cell)

    if workers == 1 or len(intersected) < 4 * workers:
        results = [
            tessellate_cell(lat, fld, cell, crossing_ts, crossing_points)
            for cell in intersected
        ]
    else:
        results = _decompose_parallel(fld, intersected, workers)

    tets: list[Tet] = []
    cell_tets: dict[int, tuple[int, int]] = {}
    face_triangles: dict[tuple[int, int], tuple[frozenset, ...]] = {}
    for res in results:
        start = len(tets)
        tets.extend(res.tets)
        cell_tets[res.cell] = (start, len(tets))
        for f, tris in res.face_triangles.items():
            face_triangles[(res.cell, f)] = tris
    return CutCellMesh(
        lattice=lat,
        field=fld,
        tets=tets,
        uniform_cells=uniform,
        cell_tets=cell_tets,
        cell_codes=codes,
        face_triangles=face_triangles,
    )


_POOL_STATE: dict = {}


def _pool_init(dims, origin, spacing, values):
    lat = HexLattice(dims, origin, spacing)
    fld = LevelSetField(lat, np.asarray(values))
    ts, points = field_crossings(fld)
    _POOL_STATE["field"] = fld
    _POOL_STATE["ts"] = ts
    _POOL_STATE["points"] = points


def _pool_run(cells):
    fld = _POOL_STATE["field"]
    return [
        tessellate_cell(fld.lattice, fld, cell, _POOL_STATE["ts"], _POOL_STATE["points"])
        for cell in cells
    ]


def _decompose_parallel(fld: LevelSetField, cells: list[int], workers: int):
    from concurrent.futures import ProcessPoolExecutor

    lat = fld.lattice
    chunks = [cells[i::workers] for i in range(workers)]
    chunks = [c for c in chunks if c]
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_pool_init,
        initargs=(lat.dims, lat.origin, lat.spacing, np.asarray(fld.values)),
    ) as pool:
        parts = list(pool.map(_pool_run, chunks))
    by_cell = {res.cell: res for part in parts for res in part}
    return [by_cell[c] for c in cells]
