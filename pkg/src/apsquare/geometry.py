"""Dyadic cubes, the standard grid, the 2^n one-third-shifted grids and dilations.

All coordinates are exact: a cube is stored as (grid, level, index, dilation)
and its corners are produced as :class:`fractions.Fraction` values, so
containment tests never touch floating point.

A cube of grid ``g`` at level ``k`` with index ``j`` is the half-open box

    2^-k * ([0, 1)^n + j + (-1)^k * s_g)

where ``s_0 = 0`` (standard grid) and, for ``g = 1..2^n``, ``s_g`` has
coordinate ``d`` equal to ``1/3`` when bit ``d`` of ``g - 1`` is set.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

THIRD = Fraction(1, 3)
COVER_RATIO = 6


class ResolutionError(ValueError):
    """Raised when a cube would be finer than the configured resolution."""


class CoverError(RuntimeError):
    """No shifted-grid cover was found; this is a bug signal, never expected."""


class MarginError(ValueError):
    """A cube (or its cover) leaves the ambient box."""


def grid_shift(grid: int, n: int) -> tuple[Fraction, ...]:
    if grid == 0:
        return (Fraction(0),) * n
    if not 1 <= grid <= 2**n:
        raise ValueError(f"grid id {grid} outside 0..{2**n}")
    bits = grid - 1
    return tuple(THIRD if (bits >> d) & 1 else Fraction(0) for d in range(n))


def grid_ids(n: int) -> range:
    """Ids of the 2^n shifted grids (id 0, the standard grid, is not included)."""
    return range(1, 2**n + 1)


def _sign(level: int) -> int:
    return 1 if level % 2 == 0 else -1


def _pow2(k: int) -> Fraction:
    return Fraction(2) ** k


@dataclass(frozen=True)
class Box:
    """Half-open axis-parallel box ``[lo, hi)`` with exact corners."""

    lo: tuple[Fraction, ...]
    hi: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def sides(self) -> tuple[Fraction, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def volume(self) -> Fraction:
        return math.prod(self.sides, start=Fraction(1))

    @property
    def center(self) -> tuple[Fraction, ...]:
        return tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def contains_point(self, x: Sequence) -> bool:
        return all(a <= Fraction(v) < b for a, b, v in zip(self.lo, self.hi, x))

    def intersect(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, c) for a, c in zip(self.lo, other.lo))
        hi = tuple(min(b, d) for b, d in zip(self.hi, other.hi))
        if any(a >= b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)

    @classmethod
    def from_floats(cls, lo: Sequence[float], hi: Sequence[float]) -> "Box":
        return cls(tuple(Fraction(v) for v in lo), tuple(Fraction(v) for v in hi))


@dataclass(frozen=True, order=True)
class Cube:
    """A cube of one of the dyadic grids, optionally concentrically dilated.

    ``dilation`` is the (power of two) factor applied about the centre; a
    dilated cube is a geometric region only and does not belong to the grid.
    """

    grid: int
    level: int
    index: tuple[int, ...]
    dilation: int = 1

    def __post_init__(self):
        if self.dilation < 1 or self.dilation & (self.dilation - 1):
            raise ValueError(f"dilation must be a power of two, got {self.dilation}")
        object.__setattr__(self, "index", tuple(int(i) for i in self.index))

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def side(self) -> Fraction:
        return _pow2(-self.level) * self.dilation

    @property
    def volume(self) -> Fraction:
        return self.side**self.n

    @property
    def base(self) -> "Cube":
        return Cube(self.grid, self.level, self.index)

    @property
    def box(self) -> Box:
        step = _pow2(-self.level)
        sgn = _sign(self.level)
        shift = grid_shift(self.grid, self.n)
        lo = tuple(step * (j + sgn * s) for j, s in zip(self.index, shift))
        if self.dilation == 1:
            return Box(lo, tuple(a + step for a in lo))
        half = (self.dilation - 1) * step / 2
        return Box(tuple(a - half for a in lo), tuple(a + step + half for a in lo))

    def parent(self) -> "Cube":
        if self.dilation != 1:
            raise ValueError("dilated cubes have no parent")
        sgn = _sign(self.level)
        shift = grid_shift(self.grid, self.n)
        # child index j' = 2j + (-1)^(k-1) * 3s at level k, so invert that
        off = tuple(int(-sgn * 3 * s) for s in shift)
        return Cube(self.grid, self.level - 1, tuple((j - o) // 2 for j, o in zip(self.index, off)))

    def ancestor(self, level: int) -> "Cube":
        q = self
        while q.level > level:
            q = q.parent()
        if q.level != level:
            raise ValueError(f"level {level} is finer than cube level {self.level}")
        return q

    def contains(self, other: "Cube") -> bool:
        return self.box.contains_box(other.box)

    def to_json(self) -> dict:
        return {"grid": self.grid, "level": self.level, "index": list(self.index), "dilation": self.dilation}

    @classmethod
    def from_json(cls, obj: dict) -> "Cube":
        return cls(int(obj["grid"]), int(obj["level"]), tuple(obj["index"]), int(obj.get("dilation", 1)))

    def __str__(self) -> str:
        box = self.box
        parts = ", ".join(f"[{a}, {b})" for a, b in zip(box.lo, box.hi))
        tag = f"g{self.grid}" if self.dilation == 1 else f"g{self.grid}x{self.dilation}"
        return f"{tag}:{parts}"


def cube_at(x: Sequence, level: int, grid: int = 0) -> Cube:
    """The cube of ``grid`` at ``level`` containing the point ``x``."""
    n = len(x)
    sgn = _sign(level)
    shift = grid_shift(grid, n)
    scale = _pow2(level)
    idx = tuple(math.floor(Fraction(v) * scale - sgn * s) for v, s in zip(x, shift))
    return Cube(grid, level, idx)


def children(q: Cube, max_level: int | None = None) -> list[Cube]:
    """The 2^n congruent subcubes of ``q`` one level down, in the same grid."""
    if q.dilation != 1:
        raise ValueError("cannot subdivide a dilated cube")
    if max_level is not None and q.level + 1 > max_level:
        raise ResolutionError(f"level {q.level + 1} is finer than the resolution limit {max_level}")
    sgn = _sign(q.level)
    shift = grid_shift(q.grid, q.n)
    first = tuple(2 * j + int(sgn * 3 * s) for j, s in zip(q.index, shift))
    return [
        Cube(q.grid, q.level + 1, tuple(f + b for f, b in zip(first, bits)))
        for bits in product((0, 1), repeat=q.n)
    ]


def descendants(q0: Cube, depth: int, max_level: int | None = None) -> Iterator[Cube]:
    """Every cube of D(q0) down to ``depth`` subdivisions, coarse to fine."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if max_level is not None and q0.level + depth > max_level:
        raise ResolutionError(f"depth {depth} below level {q0.level} exceeds the resolution limit {max_level}")
    layer = [q0]
    for d in range(depth + 1):
        yield from layer
        if d < depth:
            layer = [c for q in layer for c in children(q)]


def dilate(q: Cube, m: int) -> Cube:
    """The concentric cube ``2^m q`` (not clipped to anything)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return Cube(q.grid, q.level, q.index, q.dilation * 2**m)


def _as_box(q) -> Box:
    return q.box if isinstance(q, Cube) else q


def shifted_cover(q, ambient: Box | None = None) -> tuple[int, Cube]:
    """Return ``(i, P)`` with ``q`` inside ``P``, ``P`` in grid ``i`` and side(P) <= 6 side(q).

    ``q`` is any cube (a :class:`Cube`, possibly dilated, or a :class:`Box`
    with equal sides). If ``ambient`` is given, ``P`` must lie inside it.
    """
    box = _as_box(q)
    sides = set(box.sides)
    if len(sides) != 1:
        raise ValueError("shifted_cover needs a cube (equal sides)")
    ell = sides.pop()
    # largest 2^-k with 2^-k >= 3 ell; then 2^-k < 6 ell
    k = 0
    while _pow2(-k) < 3 * ell:
        k -= 1
    while _pow2(-(k + 1)) >= 3 * ell:
        k += 1
    step = _pow2(-k)
    sgn = _sign(k)
    bits = 0
    index = []
    for d, (a, b) in enumerate(zip(box.lo, box.hi)):
        for choice, s in ((0, Fraction(0)), (1, THIRD)):
            j = math.floor(a / step - sgn * s)
            if b <= step * (j + 1 + sgn * s):
                bits |= choice << d
                index.append(j)
                break
        else:
            raise CoverError(f"no one-third cover for {box} at level {k}")
    grid = bits + 1
    cover = Cube(grid, k, tuple(index))
    if not cover.box.contains_box(box) or cover.side > COVER_RATIO * ell:
        raise CoverError(f"cover {cover} fails for {box}")
    if ambient is not None and not ambient.contains_box(cover.box):
        raise MarginError(f"cover {cover} of {box} leaves the ambient box")
    return grid, cover


def cubes_to_json(cubes: Sequence[Cube]) -> str:
    return json.dumps([c.to_json() for c in cubes])
