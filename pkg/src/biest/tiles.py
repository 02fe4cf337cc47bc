"""Tiles, tri-tiles, order relations, rank 1, trees and strong disjointness.

Geometry on single tiles uses exact fractions. Whole collections are
compiled into a :class:`TileTable` of integer endpoints so that the order
relations become vectorized integer comparisons.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .grid import SHIFTS, _sign, ShiftedCube, ShiftedInterval, as_fraction, contains, intersects, is_sparse


@dataclass(frozen=True)
class OrderConstants:
    """Dilation constants of the order relations and of rank 1."""

    c_order: int = 3
    c_lesssim: int = 10**7
    c_scale: int = 10**9

    def __post_init__(self):
        for name in ("c_order", "c_lesssim", "c_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


NOMINAL = OrderConstants()
DESK = OrderConstants(3, 8, 16)


@dataclass(frozen=True)
class Tile:
    """Rectangle ``I x omega`` of area one; ``I`` is standard dyadic."""

    I: ShiftedInterval
    omega: ShiftedInterval
    index: int = 1

    def __post_init__(self):
        if self.I.sigma != 0:
            raise ValueError("spatial interval must be standard dyadic")
        if self.I.j + self.omega.j != 0:
            raise ValueError("tile must have area one")
        if self.index not in (1, 2, 3):
            raise ValueError("tile index must be 1, 2 or 3")

    @property
    def sigma(self) -> Fraction:
        return self.omega.sigma

    @property
    def xi(self) -> Fraction:
        return self.omega.center

    @property
    def area(self) -> Fraction:
        return self.I.length * self.omega.length

    def intersects(self, other: "Tile") -> bool:
        return intersects(self.I.bounds, other.I.bounds) and intersects(
            self.omega.bounds, other.omega.bounds
        )


def make_tile(space_exp: int, k: int, freq_k: int, sigma=0, index: int = 1) -> Tile:
    """Tile with ``|I| = 2^space_exp``, ``I = |I| [k, k+1)`` and ``omega`` from the sigma mesh."""
    return Tile(ShiftedInterval(space_exp, k), ShiftedInterval(-space_exp, freq_k, as_fraction(sigma)), index)


def order_lt(p: Tile, q: Tile, constants: OrderConstants = NOMINAL) -> bool:
    """``p < q``: ``I_p`` strictly inside ``I_q`` and ``3 omega_q`` inside ``3 omega_p``."""
    c = constants.c_order
    return (
        contains(q.I.bounds, p.I.bounds)
        and p.I != q.I
        and contains(p.omega.dilate(c), q.omega.dilate(c))
    )


def order_le(p: Tile, q: Tile, constants: OrderConstants = NOMINAL) -> bool:
    return p == q or order_lt(p, q, constants)


def order_lesssim(p: Tile, q: Tile, constants: OrderConstants = NOMINAL) -> bool:
    c = constants.c_lesssim
    return contains(q.I.bounds, p.I.bounds) and contains(p.omega.dilate(c), q.omega.dilate(c))


def order_lesssim_prime(p: Tile, q: Tile, constants: OrderConstants = NOMINAL) -> bool:
    return order_lesssim(p, q, constants) and not order_le(p, q, constants)


@dataclass(frozen=True)
class TriTile:
    """Three tiles over one spatial interval, one per frequency coordinate."""

    tiles: tuple[Tile, Tile, Tile]

    def __post_init__(self):
        if len(self.tiles) != 3:
            raise ValueError("a tri-tile has exactly three tiles")
        if any(t.I != self.tiles[0].I for t in self.tiles):
            raise ValueError("tiles of a tri-tile share their spatial interval")
        if tuple(t.index for t in self.tiles) != (1, 2, 3):
            object.__setattr__(
                self, "tiles", tuple(Tile(t.I, t.omega, i + 1) for i, t in enumerate(self.tiles))
            )

    def __getitem__(self, i: int) -> Tile:
        """One-based access to the component tiles."""
        return self.tiles[i - 1]

    @property
    def I(self) -> ShiftedInterval:
        return self.tiles[0].I

    @property
    def sigma(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(t.sigma for t in self.tiles)

    @property
    def cube(self) -> ShiftedCube:
        return ShiftedCube(self.tiles[0].omega.j, tuple(t.omega.k for t in self.tiles), self.sigma)

    @property
    def key(self) -> tuple:
        """Canonical ordering: scale, spatial index, frequency indices."""
        return (self.I.j, self.I.k, tuple(t.omega.k for t in self.tiles), self.sigma)


def make_tritile(space_exp: int, k: int, freq_ks: Sequence[int], sigma=(0, 0, 0)) -> TriTile:
    return TriTile(tuple(make_tile(space_exp, k, fk, s, i + 1) for i, (fk, s) in enumerate(zip(freq_ks, sigma))))


# ---------------------------------------------------------------------------
# integer compilation of a collection


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class TileTable:
    """Integer endpoints of a tri-tile collection and its relation matrices.

    Every endpoint is stored as a numerator over one common denominator, so
    ``2 * dilate`` endpoints stay integral and comparisons are exact.
    """

    def __init__(self, tritiles: Sequence[TriTile], constants: OrderConstants = NOMINAL):
        self.tritiles = list(tritiles)
        self.constants = constants
        ivs = [t.I.bounds for t in self.tritiles]
        ws = [[t[i].omega.bounds for t in self.tritiles] for i in (1, 2, 3)]
        den = 1
        for lo, hi in ivs + [b for w in ws for b in w]:
            den = _lcm(den, _lcm(lo.denominator, hi.denominator))
        self.den = den
        big = 0
        for lo, hi in ivs + [b for w in ws for b in w]:
            big = max(big, abs(lo.numerator * (den // lo.denominator)), abs(hi.numerator * (den // hi.denominator)))
        cmax = max(constants.c_order, constants.c_lesssim) + 2
        dtype = np.int64 if 4 * big * cmax < 2**62 else object

        def arr(pairs, which):
            return np.array([int(p[which] * den) for p in pairs], dtype=dtype)

        self.I_lo, self.I_hi = arr(ivs, 0), arr(ivs, 1)
        self.w_lo = [arr(w, 0) for w in ws]
        self.w_hi = [arr(w, 1) for w in ws]
        self.n = len(self.tritiles)
        self._cache: dict = {}

    @cached_property
    def I_len(self) -> np.ndarray:
        return self.I_hi - self.I_lo

    @cached_property
    def I_length(self) -> np.ndarray:
        """|I| as floats."""
        return np.array([float(t.I.length) for t in self.tritiles])

    def xi2(self, i: int) -> np.ndarray:
        """Twice the frequency center of component ``i`` (one-based)."""
        return self.w_lo[i - 1] + self.w_hi[i - 1]

    def _dil(self, i: int, c: int):
        lo, hi = self.w_lo[i - 1], self.w_hi[i - 1]
        s, d = lo + hi, hi - lo
        return s - c * d, s + c * d

    @cached_property
    def I_sub(self) -> np.ndarray:
        """``I_sub[p, q]``: ``I_p`` is contained in ``I_q``."""
        return (self.I_lo[None, :] <= self.I_lo[:, None]) & (self.I_hi[:, None] <= self.I_hi[None, :])

    @cached_property
    def I_eq(self) -> np.ndarray:
        return (self.I_lo[:, None] == self.I_lo[None, :]) & (self.I_hi[:, None] == self.I_hi[None, :])

    @cached_property
    def I_meet(self) -> np.ndarray:
        return (self.I_lo[:, None] < self.I_hi[None, :]) & (self.I_lo[None, :] < self.I_hi[:, None])

    def same_tile(self, i: int) -> np.ndarray:
        key = ("same", i)
        if key not in self._cache:
            lo, hi = self.w_lo[i - 1], self.w_hi[i - 1]
            self._cache[key] = self.I_eq & (lo[:, None] == lo[None, :]) & (hi[:, None] == hi[None, :])
        return self._cache[key]

    def _dil_contains(self, i: int, c: int) -> np.ndarray:
        """``M[p, q]``: ``c omega_q`` is inside ``c omega_p``."""
        lo, hi = self._dil(i, c)
        return (lo[:, None] <= lo[None, :]) & (hi[None, :] <= hi[:, None])

    def le(self, i: int) -> np.ndarray:
        """``le[p, q]``: ``P_{p,i} <= P_{q,i}``."""
        key = ("le", i)
        if key not in self._cache:
            strict = self.I_sub & ~self.I_eq & self._dil_contains(i, self.constants.c_order)
            self._cache[key] = strict | self.same_tile(i)
        return self._cache[key]

    def lesssim(self, i: int) -> np.ndarray:
        key = ("lesssim", i)
        if key not in self._cache:
            self._cache[key] = self.I_sub & self._dil_contains(i, self.constants.c_lesssim)
        return self._cache[key]

    def lesssim_prime(self, i: int) -> np.ndarray:
        return self.lesssim(i) & ~self.le(i)

    def lesssim_plus(self, i: int) -> np.ndarray:
        """``P_{p,i} lesssim' P_{q,i}`` with ``xi_p > xi_q``."""
        x = self.xi2(i)
        return self.lesssim_prime(i) & (x[:, None] > x[None, :])

    def lesssim_minus(self, i: int) -> np.ndarray:
        x = self.xi2(i)
        return self.lesssim_prime(i) & (x[:, None] < x[None, :])

    def double_meet(self, i: int) -> np.ndarray:
        """``2 omega_{p,i}`` and ``2 omega_{q,i}`` overlap."""
        return self.omega_meet(i, 2)

    def omega_meet(self, i: int, c: int = 1) -> np.ndarray:
        lo, hi = self._dil(i, c)
        return (lo[:, None] < hi[None, :]) & (lo[None, :] < hi[:, None])

    def tile_meet(self, i: int) -> np.ndarray:
        """The rectangles ``I x omega_i`` of the two tri-tiles overlap."""
        return self.I_meet & self.omega_meet(i, 1)

    def index(self, t: TriTile) -> int:
        return self._positions[t]

    @cached_property
    def _positions(self) -> dict:
        return {t: p for p, t in enumerate(self.tritiles)}


# ---------------------------------------------------------------------------
# rank 1


@dataclass(frozen=True)
class Rank1Report:
    ok: bool
    pair: tuple[TriTile, TriTile] | None = None
    clause: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_rank1(tritiles: Sequence[TriTile], constants: OrderConstants = NOMINAL) -> Rank1Report:
    """All three rank-one clauses over ordered pairs of distinct tri-tiles.

    Returns the first violating pair ``(P', P)`` and the clause number.
    """
    tritiles = list(dict.fromkeys(tritiles))
    if len({t.sigma for t in tritiles}) > 1:
        raise ValueError("all tri-tiles must share one shift vector")
    if len(tritiles) < 2:
        return Rank1Report(True)
    tab = TileTable(tritiles, constants)
    n = tab.n
    off = ~np.eye(n, dtype=bool)
    for j in (1, 2, 3):
        bad = tab.same_tile(j) & off
        if bad.any():
            p, q = np.argwhere(bad)[0]
            return Rank1Report(False, (tritiles[p], tritiles[q]), 1)
    ratio_ok = (tab.I_len[:, None] * 1) < constants.c_scale * tab.I_len[None, :]
    for j in (1, 2, 3):
        rel = tab.le(j) & off
        for i in (1, 2, 3):
            bad = rel & ~tab.lesssim(i)
            if bad.any():
                p, q = np.argwhere(bad)[0]
                return Rank1Report(False, (tritiles[p], tritiles[q]), 2)
        for i in (1, 2, 3):
            if i == j:
                continue
            bad = rel & ratio_ok & ~tab.lesssim_prime(i)
            if bad.any():
                p, q = np.argwhere(bad)[0]
                return Rank1Report(False, (tritiles[p], tritiles[q]), 3)
    return Rank1Report(True)


def check_sparse(tritiles: Sequence[TriTile], factor=10**9) -> bool:
    """Shared shift and a sparse set of frequency cubes."""
    tritiles = list(tritiles)
    if len({t.sigma for t in tritiles}) > 1:
        return False
    return is_sparse(list(dict.fromkeys(t.cube for t in tritiles)), factor)


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class Tree:
    """A ``kind``-tree: every member ``P`` has ``P_kind <= top_kind``.

    The top need not be a member; ``contains_top`` records whether it is.
    """

    top: TriTile
    members: tuple[TriTile, ...]
    kind: int
    label: str = ""

    @property
    def contains_top(self) -> bool:
        return self.top in self.members

    @property
    def I(self) -> ShiftedInterval:
        return self.top.I

    @property
    def omega(self) -> ShiftedInterval:
        return self.top[self.kind].omega

    def is_valid(self, constants: OrderConstants = NOMINAL) -> bool:
        return all(order_le(p[self.kind], self.top[self.kind], constants) for p in self.members)

    def __len__(self) -> int:
        return len(self.members)


def maximal_tree(universe: Sequence[TriTile], top: TriTile, i: int, constants: OrderConstants = NOMINAL) -> Tree:
    """All members of the universe lying below ``top`` in component ``i``."""
    if top not in universe:
        raise ValueError("top must belong to the universe")
    members = tuple(p for p in universe if order_le(p[i], top[i], constants))
    return Tree(top, members, i)


@dataclass(frozen=True)
class DisjointReport:
    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_strongly_disjoint(trees: Sequence[Tree], i: int) -> DisjointReport:
    """Both strong ``i``-disjointness conditions for every pair of trees.

    The witness is ``(s, t, P, P', condition)`` with tree positions ``s, t``.
    """
    trees = list(trees)
    for s in range(len(trees)):
        for t in range(s + 1, len(trees)):
            a, b = trees[s], trees[t]
            for p in a.members:
                for q in b.members:
                    if p[i] == q[i]:
                        return DisjointReport(False, (s, t, p, q, 1))
                    if intersects(p[i].omega.dilate(2), q[i].omega.dilate(2)):
                        if intersects(q.I.bounds, a.I.bounds) or intersects(p.I.bounds, b.I.bounds):
                            return DisjointReport(False, (s, t, p, q, 2))
    return DisjointReport(True)


def tree_collection_members(trees: Iterable[Tree]) -> list[TriTile]:
    seen: dict = {}
    for t in trees:
        for p in t.members:
            seen[p] = None
    return list(seen)


# ---------------------------------------------------------------------------
# the biest trick


@dataclass
class BiestTrickResult:
    selected: list[TriTile]
    violations: list[tuple[TriTile, TriTile]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def biest_trick_predicate(tree: Tree, p_universe: Sequence[TriTile]) -> BiestTrickResult:
    """Tri-tiles whose first frequency interval contains ``omega_{Q_3}`` for some tree member.

    The verifier walks every pair ``(Q, P)`` whose intervals meet and checks
    that containment for that pair agrees with membership in the selection.
    """
    q3 = [q[3].omega.bounds for q in tree.members]
    selected = [p for p in p_universe if any(contains(p[1].omega.bounds, w) for w in q3)]
    chosen = set(selected)
    violations = []
    for q, w in zip(tree.members, q3):
        for p in p_universe:
            w1 = p[1].omega.bounds
            if intersects(w1, w) and contains(w1, w) != (p in chosen):
                violations.append((q, p))
    return BiestTrickResult(selected, violations)


# ---------------------------------------------------------------------------
# generator


def scale_gap(constants: OrderConstants) -> int:
    """Smallest binary gap ``g`` with ``2^g > c_scale``."""
    return int(math.floor(math.log2(constants.c_scale))) + 1


def _shift_index(x: Fraction, length: Fraction, sigma: Fraction, j: int) -> int:
    return math.floor(x / length - _sign(j) * sigma)


def _frequency_cubes(rng, levels, top_exp, gap, constants, sigma, band, roots):
    """Sparse nested frequency cubes, coarsest-frequency level first.

    Level 0 holds ``roots`` cubes with side ``2^(-top_exp + gap(levels-1))``.
    Each later level places cubes of side ``/ 2^gap`` inside a parent: one
    coordinate sits within the tripled parent interval and the other two sit
    in the annulus between the tripled and the ``c_lesssim``-dilated parent.
    """
    c_mid = Fraction(constants.c_lesssim, 2)
    cubes: list[list[tuple]] = []
    f_exp0 = -(top_exp - gap * (levels - 1))
    side0 = Fraction(2) ** f_exp0
    lo_b, hi_b = band
    # roots: separated by at least 2 c_lesssim sides in every coordinate
    sep = 2 * constants.c_lesssim + 4
    span = int((hi_b - lo_b) / side0)
    if span < 1:
        raise ValueError("band too narrow for the coarsest frequency scale")
    level0 = []
    tries = 0
    while len(level0) < roots and tries < 1000:
        tries += 1
        ks = []
        for i in range(3):
            x = lo_b + side0 * int(rng.integers(0, span))
            ks.append(_shift_index(x, side0, sigma[i], f_exp0) + 1)
        cand = ShiftedCube(f_exp0, tuple(ks), sigma)
        if any(not all((hi - lo) >= 0 for lo, hi in [a.bounds]) for a in cand.axes):
            continue
        if not all(lo_b <= a.lo and a.hi <= hi_b for a in cand.axes):
            continue
        if all(min(abs(a - b) for a, b in zip(cand.ks, c.ks)) >= sep for c, _ in level0):
            level0.append((cand, None))
    cubes.append(level0)
    for lev in range(1, levels):
        f_exp = f_exp0 - gap * lev
        side = Fraction(2) ** f_exp
        nxt = []
        for parent, _ in cubes[-1]:
            for _rep in range(int(rng.integers(1, 4))):
                j = int(rng.integers(1, 4))
                ks = []
                ok = True
                for i in range(3):
                    pa = parent.axes[i]
                    if i + 1 == j:
                        lo, hi = pa.dilate(constants.c_order)
                        lo, hi = lo + side, hi - 2 * side
                    else:
                        sign = 1 if rng.random() < 0.5 else -1
                        inner = Fraction(constants.c_order, 2) * pa.length + 2 * side
                        outer = c_mid * pa.length - 3 * side
                        if outer <= inner:
                            ok = False
                            break
                        off = inner + (outer - inner) * Fraction(int(rng.integers(0, 1000)), 1000)
                        lo = hi = pa.center + sign * off
                    x = lo + (hi - lo) * Fraction(int(rng.integers(0, 1000)), 1000)
                    ks.append(_shift_index(x, side, sigma[i], f_exp))
                if not ok:
                    continue
                cand = ShiftedCube(f_exp, tuple(ks), sigma)
                if not all(lo_b <= a.lo and a.hi <= hi_b for a in cand.axes):
                    continue
                if any(not _cubes_separated(cand, c, constants) for c, _ in nxt):
                    continue
                nxt.append((cand, (parent, j)))
        cubes.append(nxt)
    return cubes


def _cubes_separated(a: ShiftedCube, b: ShiftedCube, constants) -> bool:
    """Same-scale cubes far apart in some coordinate (sparse with margin)."""
    f = constants.c_scale
    return not all(intersects(x, y) for x, y in zip(a.dilate(f), b.dilate(f)))


def _rank1_compatible(new: TriTile, others: Sequence[TriTile], constants: OrderConstants) -> bool:
    for old in others:
        if new == old:
            return False
        for a, b in ((new, old), (old, new)):
            for j in (1, 2, 3):
                if a[j] == b[j]:
                    return False
                if order_le(a[j], b[j], constants):
                    for i in (1, 2, 3):
                        if not order_lesssim(a[i], b[i], constants):
                            return False
                        if i != j and a.I.length < constants.c_scale * b.I.length:
                            if order_le(a[i], b[i], constants):
                                return False
    return True


def gen_rank1(
    seed: int,
    count: int,
    scale_range: tuple[int, int] = (0, 0),
    constants: OrderConstants = DESK,
    *,
    sigma: tuple | None = None,
    window: tuple | None = None,
    band: tuple | None = None,
    roots: int = 2,
    max_tries: int | None = None,
) -> list[TriTile]:
    """Deterministic sparse rank-one family of at most ``count`` tri-tiles.

    ``scale_range = (lo, hi)`` bounds the spatial exponents; levels sit
    ``scale_gap`` binary orders apart starting from ``hi``. Tri-tiles are
    placed inside the spatial intervals of coarser related tri-tiles when
    possible, which creates tree structure. Raises ``RuntimeError`` if
    fewer than ``count`` tri-tiles survive ``max_tries`` proposals.
    """
    rng = np.random.default_rng(seed)
    lo_s, hi_s = scale_range
    gap = scale_gap(constants)
    levels = 1 + max(0, (hi_s - lo_s) // gap)
    if sigma is None:
        sigma = tuple(SHIFTS[int(rng.integers(0, 3))] for _ in range(3))
    sigma = tuple(as_fraction(s) for s in sigma)
    if window is None:
        window = (Fraction(0), Fraction(2) ** hi_s * 4)
    window = tuple(as_fraction(w) for w in window)
    if band is None:
        width = Fraction(2) ** (-lo_s) * 8 * constants.c_lesssim * (constants.c_scale + 1)
        band = (-width, width)
    band = tuple(as_fraction(b) for b in band)
    cubes = _frequency_cubes(rng, levels, hi_s, gap, constants, sigma, band, roots)
    # flatten: level index, cube, parent link
    flat = [(lev, c, link) for lev, row in enumerate(cubes) for c, link in row]
    if not flat:
        raise RuntimeError("no frequency cubes fit the band")
    space_of = {lev: hi_s - gap * (levels - 1 - lev) for lev in range(levels)}
    out: list[TriTile] = []
    by_cube: dict = {}
    max_tries = max_tries or 200 * count + 200
    for _ in range(max_tries):
        if len(out) >= count:
            break
        lev, cube, link = flat[int(rng.integers(0, len(flat)))]
        s = space_of[lev]
        length = Fraction(2) ** s
        # nest inside a tri-tile of a finer-frequency cube derived from this one
        kids = [t for (l2, c2, lk2) in flat if lk2 is not None and lk2[0] == cube for t in by_cube.get(c2, [])]
        if kids and rng.random() < 0.8:
            host = kids[int(rng.integers(0, len(kids)))]
            n_sub = int(host.I.length / length)
            k = host.I.k * n_sub + int(rng.integers(0, n_sub))
        else:
            n_pos = int((window[1] - window[0]) / length)
            if n_pos < 1:
                continue
            k = int(window[0] / length) + int(rng.integers(0, n_pos))
        cand = TriTile(
            tuple(Tile(ShiftedInterval(s, k), cube.axes[i], i + 1) for i in range(3))
        )
        if _rank1_compatible(cand, out, constants):
            out.append(cand)
            by_cube.setdefault(cube, []).append(cand)
    if len(out) < count:
        raise RuntimeError(f"only {len(out)} of {count} tri-tiles fit after {max_tries} proposals")
    return sorted(out, key=lambda t: t.key)


# ---------------------------------------------------------------------------
# serialization


def _iv_json(iv) -> list[str]:
    lo, hi = iv
    return [str(lo), str(hi)]


def tritile_to_json(t: TriTile, tree_id: int | None = None) -> dict:
    rec = {
        "I": _iv_json(t.I.bounds),
        "omega_1": _iv_json(t[1].omega.bounds),
        "omega_2": _iv_json(t[2].omega.bounds),
        "omega_3": _iv_json(t[3].omega.bounds),
        "shift": [str(s) for s in t.sigma],
    }
    if tree_id is not None:
        rec["tree"] = tree_id
    return rec


def tritile_from_json(rec: dict) -> TriTile:
    lo, hi = (Fraction(x) for x in rec["I"])
    s = int(math.log2(hi - lo))
    k = int(lo / (hi - lo))
    sig = [Fraction(x) for x in rec["shift"]]
    tiles = []
    for i in range(3):
        wlo, whi = (Fraction(x) for x in rec[f"omega_{i + 1}"])
        fk = _shift_index(wlo + (whi - wlo) / 2, whi - wlo, sig[i], -s)
        w = ShiftedInterval(-s, fk, sig[i])
        if w.bounds != (wlo, whi):
            raise ValueError(f"frequency interval {rec[f'omega_{i + 1}']} is not in the mesh")
        tiles.append(Tile(ShiftedInterval(s, k), w, i + 1))
    return TriTile(tuple(tiles))


def dump_tiles(tritiles: Sequence[TriTile], trees: Sequence[Tree] | None = None) -> str:
    tree_of = {}
    for n, tr in enumerate(trees or []):
        for p in tr.members:
            tree_of.setdefault(p, n)
    return json.dumps([tritile_to_json(t, tree_of.get(t)) for t in tritiles], indent=1)


def load_tiles(text: str) -> list[TriTile]:
    return [tritile_from_json(r) for r in json.loads(text)]
