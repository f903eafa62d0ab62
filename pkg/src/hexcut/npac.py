"""Nodal sign patterns on a cell and their symmetry classes.

A pattern is an 8-bit code: bit c is 1 when local corner c (bit order
x, y, z) is solid.  Codes 0 and 255 are the two uniform patterns; the
other 254 describe intersected cells.

Four candidate symmetry groups act on the codes:

* ``rot``: the 24 rotations of the cube,
* ``rot_refl``: the full 48-element symmetry group,
* ``rot_compl``: rotations combined with solid/void complement,
* ``rot_refl_compl``: full group combined with complement.

:func:`orbit_counts` enumerates the orbit count of the 254 intersected
codes under each group; exactly one group is expected to give the
canonical fourteen classes, and :func:`canonical_group` finds it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import InputError

GROUP_NAMES = ("rot", "rot_refl", "rot_compl", "rot_refl_compl")

_CORNER_VECS = tuple(
    (2 * (c & 1) - 1, 2 * ((c >> 1) & 1) - 1, 2 * ((c >> 2) & 1) - 1) for c in range(8)
)
_VEC_TO_CORNER = {v: c for c, v in enumerate(_CORNER_VECS)}


def _rot_x(v):
    x, y, z = v
    return (x, -z, y)


def _rot_y(v):
    x, y, z = v
    return (z, y, -x)


def _mirror_x(v):
    x, y, z = v
    return (-x, y, z)


def _perm_from_map(fn) -> tuple[int, ...]:
    return tuple(_VEC_TO_CORNER[fn(_CORNER_VECS[c])] for c in range(8))


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """Permutation p applied after q."""
    return tuple(p[q[c]] for c in range(8))


@lru_cache(maxsize=None)
def corner_permutations(include_reflections: bool) -> tuple[tuple[int, ...], ...]:
    """Corner permutations of the cube symmetry group, as sorted tuples."""
    gens = [_perm_from_map(_rot_x), _perm_from_map(_rot_y)]
    if include_reflections:
        gens.append(_perm_from_map(_mirror_x))
    identity = tuple(range(8))
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = _compose(g, p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return tuple(sorted(seen))


def apply_permutation(code: int, perm: tuple[int, ...]) -> int:
    """Move the sign at corner c to corner perm[c]."""
    out = 0
    for c in range(8):
        if code >> c & 1:
            out |= 1 << perm[c]
    return out


def pattern_images(code: int, group: str) -> list[tuple[int, tuple[int, ...], bool]]:
    """All (image, permutation, complemented) triples of a code under a group."""
    if group not in GROUP_NAMES:
        raise InputError(f"unknown symmetry group {group!r}, pick one of {GROUP_NAMES}")
    perms = corner_permutations("refl" in group)
    complement = "compl" in group
    out = []
    for perm in perms:
        img = apply_permutation(code, perm)
        out.append((img, perm, False))
        if complement:
            out.append((img ^ 0xFF, perm, True))
    return out


@lru_cache(maxsize=None)
def orbit_counts() -> dict[str, int]:
    """Orbit counts of the 254 intersected codes under each candidate group."""
    counts = {}
    for group in GROUP_NAMES:
        seen = set()
        orbits = 0
        for code in range(1, 255):
            if code in seen:
                continue
            orbits += 1
            for img, _, _ in pattern_images(code, group):
                if 0 < img < 255:
                    seen.add(img)
        counts[group] = orbits
    return counts


@lru_cache(maxsize=None)
def canonical_group() -> str:
    """The candidate group whose orbit count is exactly fourteen."""
    matches = [g for g, n in orbit_counts().items() if n == 14]
    if len(matches) != 1:
        raise InputError(
            f"expected exactly one group with 14 orbits, found {matches or 'none'}"
        )
    return matches[0]


@dataclass(frozen=True)
class NpacClass:
    """Symmetry class of an intersected sign pattern."""

    class_id: int
    representative: int
    permutation: tuple[int, ...]
    complemented: bool


@lru_cache(maxsize=None)
def _class_table(group: str) -> dict:
    reps = []
    rep_of = {}
    for code in range(1, 255):
        if code in rep_of:
            continue
        orbit = {img for img, _, _ in pattern_images(code, group) if 0 < img < 255}
        rep = min(orbit)
        reps.append(rep)
        for img in orbit:
            rep_of[img] = rep
    reps = sorted(set(reps))
    class_ids = {rep: i + 1 for i, rep in enumerate(reps)}
    return {"rep_of": rep_of, "class_ids": class_ids, "reps": tuple(reps)}


def class_representatives(group: str | None = None) -> tuple[int, ...]:
    """Minimal representative code of every class, ascending."""
    return _class_table(group or canonical_group())["reps"]


def canonicalize(code: int, group: str | None = None) -> NpacClass:
    """Class of an intersected pattern plus one transform onto the representative."""
    if not (0 <= code <= 255):
        raise InputError(f"sign pattern code must be in [0, 255], got {code}")
    if code in (0, 255):
        raise InputError(f"code {code} is uniform, not an intersected pattern")
    group = group or canonical_group()
    table = _class_table(group)
    rep = table["rep_of"][code]
    for img, perm, comp in pattern_images(code, group):
        if img == rep:
            return NpacClass(table["class_ids"][rep], rep, perm, comp)
    raise AssertionError("orbit enumeration lost its own representative")


def pattern_code(signs) -> int:
    """Code of 8 corner signs given as +1 / -1 in local corner order."""
    if len(signs) != 8:
        raise InputError("a sign pattern needs exactly 8 corner signs")
    code = 0
    for c, s in enumerate(signs):
        if s > 0:
            code |= 1 << c
    return code
