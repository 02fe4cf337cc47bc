"""Shifted dyadic meshes, sparse splitting, the dyadic maximal function and
the approximate cutoff.

All geometry is exact: endpoints are :class:`fractions.Fraction` values, so
containment and intersection tests never depend on rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

SHIFTS: tuple[Fraction, ...] = (Fraction(0), Fraction(1, 3), Fraction(2, 3))

Interval = tuple[Fraction, Fraction]


def as_fraction(x) -> Fraction:
    """Exact conversion; floats keep their binary value."""
    return x if isinstance(x, Fraction) else Fraction(x)


def _sign(j: int) -> int:
    """``(-1)^j`` as an integer, also for negative ``j``."""
    return -1 if j % 2 else 1


def _check_shift(sigma) -> Fraction:
    s = as_fraction(sigma)
    if s not in SHIFTS:
        raise ValueError(f"shift must be one of 0, 1/3, 2/3, got {sigma}")
    return s


def dilate(iv: Interval, c) -> Interval:
    """Dilate an interval about its center by the factor ``c``."""
    lo, hi = iv
    mid = (lo + hi) / 2
    half = as_fraction(c) * (hi - lo) / 2
    return (mid - half, mid + half)


def contains(outer: Interval, inner: Interval) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def intersects(a: Interval, b: Interval) -> bool:
    """Half-open intervals share a set of positive measure."""
    return a[0] < b[1] and b[0] < a[1]


@dataclass(frozen=True)
class ShiftedInterval:
    """Element ``2^j (k + [0,1) + (-1)^j sigma)`` of the mesh with shift sigma."""

    j: int
    k: int
    sigma: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_shift(self.sigma))
        object.__setattr__(self, "j", int(self.j))
        object.__setattr__(self, "k", int(self.k))

    @cached_property
    def lo(self) -> Fraction:
        return Fraction(2) ** self.j * (self.k + _sign(self.j) * self.sigma)

    @cached_property
    def hi(self) -> Fraction:
        return self.lo + self.length

    @cached_property
    def length(self) -> Fraction:
        return Fraction(2) ** self.j

    @property
    def center(self) -> Fraction:
        return self.lo + self.length / 2

    @property
    def bounds(self) -> Interval:
        return (self.lo, self.hi)

    def dilate(self, c) -> Interval:
        return dilate(self.bounds, c)

    def __contains__(self, x) -> bool:
        x = as_fraction(x)
        return self.lo <= x < self.hi

    def __repr__(self) -> str:
        return f"ShiftedInterval(j={self.j}, k={self.k}, sigma={self.sigma}) = [{self.lo}, {self.hi})"


def mesh_interval(j: int, k: int, sigma=0) -> ShiftedInterval:
    return ShiftedInterval(j, k, as_fraction(sigma))


def containing_interval(x, j: int, sigma=0) -> ShiftedInterval:
    """The mesh interval of scale ``2^j`` that contains ``x``."""
    sigma = _check_shift(sigma)
    x = as_fraction(x)
    k = math.floor(x / Fraction(2) ** j - _sign(j) * sigma)
    return ShiftedInterval(j, k, sigma)


@dataclass(frozen=True)
class ShiftedCube:
    """Cube in the shifted n-dyadic mesh; all axes share the scale ``2^j``."""

    j: int
    ks: tuple[int, ...]
    sigma: tuple[Fraction, ...]

    def __post_init__(self):
        if not 1 <= len(self.ks) <= 3 or len(self.ks) != len(self.sigma):
            raise ValueError("cube needs 1 to 3 axes with one shift per axis")
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        object.__setattr__(self, "sigma", tuple(_check_shift(s) for s in self.sigma))

    @property
    def n(self) -> int:
        return len(self.ks)

    @cached_property
    def axes(self) -> tuple[ShiftedInterval, ...]:
        return tuple(ShiftedInterval(self.j, k, s) for k, s in zip(self.ks, self.sigma))

    @property
    def side(self) -> Fraction:
        return Fraction(2) ** self.j

    @property
    def center(self) -> tuple[Fraction, ...]:
        return tuple(a.center for a in self.axes)

    def dilate(self, c) -> tuple[Interval, ...]:
        return tuple(a.dilate(c) for a in self.axes)


def enclosing_shifted_cube(box: Sequence[Interval]) -> ShiftedCube:
    """Smallest-scale shifted cube ``Q'`` with ``box`` inside ``(7/10) Q'``.

    ``box`` is a list of per-axis ``(lo, hi)`` pairs of equal length. The
    search runs over every shift vector and every scale ``2^j <= 8 side``.
    """
    box = [(as_fraction(lo), as_fraction(hi)) for lo, hi in box]
    side = box[0][1] - box[0][0]
    if side <= 0 or any(hi - lo != side for lo, hi in box):
        raise ValueError("box must be a nonempty cube")
    # (7/10) 2^j >= side is necessary; 2^j <= 8 side is the search ceiling.
    j_min = math.floor(math.log2(float(side * Fraction(10, 7)))) - 1
    j_max = math.floor(math.log2(float(8 * side))) + 1
    for j in range(j_min, j_max + 1):
        length = Fraction(2) ** j
        if length > 8 * side or Fraction(7, 10) * length < side:
            continue
        ks, sig = [], []
        for lo, hi in box:
            found = None
            for s in SHIFTS:
                # candidate k values: the cube must contain the box center
                centre = (lo + hi) / 2
                k0 = math.floor(centre / length - _sign(j) * s)
                for k in (k0 - 1, k0, k0 + 1):
                    iv = ShiftedInterval(j, k, s)
                    if contains(iv.dilate(Fraction(7, 10)), (lo, hi)):
                        found = (k, s)
                        break
                if found:
                    break
            if found is None:
                break
            ks.append(found[0])
            sig.append(found[1])
        else:
            return ShiftedCube(j, tuple(ks), tuple(sig))
    raise RuntimeError("no enclosing shifted cube found")  # unreachable for valid input


def _cube_conflict(a: ShiftedCube, b: ShiftedCube, factor) -> bool:
    """True when the pair violates sparseness with the given expansion factor."""
    if a == b:
        return False
    if a.j != b.j:
        small, large = (a, b) if a.j < b.j else (b, a)
        return not factor * small.side < large.side
    da, db = a.dilate(factor), b.dilate(factor)
    return all(intersects(x, y) for x, y in zip(da, db))


def is_sparse(cubes: Sequence[ShiftedCube], factor=10**9) -> bool:
    cubes = list(cubes)
    return not any(
        _cube_conflict(cubes[p], cubes[q], factor)
        for p in range(len(cubes))
        for q in range(p + 1, len(cubes))
    )


def sparse_split(cubes: Sequence[ShiftedCube], factor=10**9) -> list[list[ShiftedCube]]:
    """Greedy coloring of the sparseness conflict graph.

    Cubes are visited by decreasing scale then index, and each goes to the
    first part it does not conflict with.
    """
    cubes = list(dict.fromkeys(cubes))
    sigmas = {c.sigma for c in cubes}
    if len(sigmas) > 1:
        raise ValueError("all cubes must come from one shifted mesh")
    order = sorted(cubes, key=lambda c: (-c.j, c.ks))
    parts: list[list[ShiftedCube]] = []
    for c in order:
        for part in parts:
            if not any(_cube_conflict(c, d, factor) for d in part):
                part.append(c)
                break
        else:
            parts.append([c])
    return parts


def dyadic_intervals_of(E: Iterable[Interval]) -> list[Interval]:
    """Normalize a finite union of intervals: sort and merge touching pieces."""
    pieces = sorted((as_fraction(a), as_fraction(b)) for a, b in E if b > a)
    merged: list[Interval] = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def measure(E: Iterable[Interval]) -> Fraction:
    return sum((hi - lo for lo, hi in dyadic_intervals_of(E)), Fraction(0))


def _overlap(E: Sequence[Interval], lo: Fraction, hi: Fraction) -> Fraction:
    total = Fraction(0)
    for a, b in E:
        if a < hi and lo < b:
            total += min(b, hi) - max(a, lo)
    return total


def _finest_scale(E: Sequence[Interval]) -> int:
    """Largest j such that every endpoint of E lies on the grid 2^j Z."""
    j = 60
    for a, b in E:
        for x in (a, b):
            if x == 0:
                continue
            num, den = x.numerator, x.denominator
            if den & (den - 1):
                raise ValueError("endpoints must be dyadic rationals")
            v = (num & -num).bit_length() - 1 - (den.bit_length() - 1)
            j = min(j, v)
    return j


def dyadic_maximal(E: Iterable[Interval], x, root_exp: int | None = None) -> Fraction:
    """``sup |E ∩ I| / |I|`` over standard dyadic intervals ``I`` containing ``x``.

    Ancestors are scanned from the finest scale of E up to ``2^root_exp``;
    the default root is ``2^20`` times the span of E.
    """
    E = dyadic_intervals_of(E)
    if not E:
        return Fraction(0)
    x = as_fraction(x)
    j0 = _finest_scale(E)
    if root_exp is None:
        span = E[-1][1] - E[0][0]
        root_exp = max(j0, math.ceil(math.log2(float(span)))) + 20
    best = Fraction(0)
    for j in range(j0, root_exp + 1):
        iv = containing_interval(x, j)
        best = max(best, _overlap(E, iv.lo, iv.hi) / iv.length)
    return best


def maximal_superlevel(E: Iterable[Interval], level, root_exp: int | None = None) -> list[Interval]:
    """Exact ``{x : M chi_E(x) > level}`` for the dyadic maximal function.

    The set is the union of dyadic intervals whose E-density exceeds
    ``level``; only intervals meeting E can qualify.
    """
    E = dyadic_intervals_of(E)
    level = as_fraction(level)
    if not E or level < 0:
        return []
    j0 = _finest_scale(E)
    if root_exp is None:
        span = E[-1][1] - E[0][0]
        root_exp = max(j0, math.ceil(math.log2(float(span)))) + 20
    found: list[Interval] = []
    for j in range(j0, root_exp + 1):
        length = Fraction(2) ** j
        ks = set()
        for a, b in E:
            k_lo = math.floor(a / length)
            k_hi = math.ceil(b / length)
            ks.update(range(k_lo, k_hi))
        hit = False
        for k in sorted(ks):
            lo, hi = k * length, (k + 1) * length
            if _overlap(E, lo, hi) > level * length:
                found.append((lo, hi))
                hit = True
        if not hit and length * level >= measure(E):
            break
    return dyadic_intervals_of(found)


@dataclass(frozen=True)
class ApproxCutoff:
    """``(1 + (|x - center| / width)^2)^(-M/2)``."""

    center: float
    width: float
    M: int = 1

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be a positive integer")
        if self.width <= 0:
            raise ValueError("width must be positive")


def cutoff_value(c: ApproxCutoff, x):
    """Value of the cutoff at ``x``; accepts scalars or numpy arrays."""
    u = (np.asarray(x, dtype=float) - float(c.center)) / float(c.width)
    val = (1.0 + u * u) ** (-0.5 * c.M)
    return float(val) if np.ndim(val) == 0 else val
