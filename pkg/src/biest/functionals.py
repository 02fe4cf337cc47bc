"""Size, energy and modified energy of coefficient sequences on tri-tiles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .tiles import NOMINAL, OrderConstants, TileTable, Tree, TriTile

ENERGY_BUDGET = 20
MODIFIED_EXACT_LIMIT = 8


@lru_cache(maxsize=64)
def table_for(universe: tuple[TriTile, ...], constants: OrderConstants) -> TileTable:
    return TileTable(universe, constants)


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Complex numbers attached to the ``slot``-th tiles of a tri-tile universe."""

    universe: tuple[TriTile, ...]
    values: np.ndarray
    slot: int = 1
    constants: OrderConstants = NOMINAL

    def __post_init__(self):
        u = tuple(self.universe)
        if len(set(u)) != len(u):
            raise ValueError("universe contains duplicate tri-tiles")
        v = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if v.shape != (len(u),):
            raise ValueError("one coefficient per tri-tile is required")
        if not np.all(np.isfinite(v)):
            raise ValueError("coefficients must be finite")
        if self.slot not in (1, 2, 3):
            raise ValueError("slot must be 1, 2 or 3")
        v.setflags(write=False)
        object.__setattr__(self, "universe", u)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_map(cls, mapping: dict, slot: int = 1, constants: OrderConstants = NOMINAL) -> "CoefficientSequence":
        u = tuple(mapping)
        return cls(u, np.array([mapping[t] for t in u], dtype=np.complex128), slot, constants)

    def __len__(self) -> int:
        return len(self.universe)

    def __getitem__(self, t: TriTile) -> complex:
        return complex(self.values[self.table.index(t)])

    @property
    def table(self) -> TileTable:
        return table_for(self.universe, self.constants)

    @property
    def abs2(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def restrict(self, subset: Sequence[TriTile]) -> "CoefficientSequence":
        keep = [t for t in self.universe if t in set(subset)]
        return CoefficientSequence(tuple(keep), np.array([self[t] for t in keep]), self.slot, self.constants)

    def scaled(self, lam: complex) -> "CoefficientSequence":
        return CoefficientSequence(self.universe, lam * self.values, self.slot, self.constants)

    def with_values(self, values) -> "CoefficientSequence":
        return CoefficientSequence(self.universe, values, self.slot, self.constants)

    def to_json(self) -> str:
        return json.dumps(
            [{"tile_id": n, "re": float(v.real), "im": float(v.imag)} for n, v in enumerate(self.values)]
        )

    @classmethod
    def from_json(cls, text: str, universe, slot: int = 1, constants: OrderConstants = NOMINAL):
        vals = np.zeros(len(universe), dtype=np.complex128)
        for rec in json.loads(text):
            vals[int(rec["tile_id"])] = complex(rec["re"], rec["im"])
        return cls(tuple(universe), vals, slot, constants)


# ---------------------------------------------------------------------------
# size


@dataclass(frozen=True)
class SizeResult:
    value: float
    tree: Tree | None


def size(seq: CoefficientSequence, extra_tops: Sequence[TriTile] = ()) -> SizeResult:
    """Largest normalized tree mass over maximal ``i``-trees, ``i != slot``.

    Tops range over the universe plus ``extra_tops``; members always come
    from the universe. The supremum is attained at maximal trees since the
    mass only grows with the member set.
    """
    if len(seq) == 0:
        return SizeResult(0.0, None)
    extra = [t for t in extra_tops if t not in set(seq.universe)]
    n = len(seq)
    tab = seq.table if not extra else TileTable(list(seq.universe) + extra, seq.constants)
    w = seq.abs2
    lengths = tab.I_length
    best, arg = -1.0, None
    for i in (1, 2, 3):
        if i == seq.slot:
            continue
        mass = w @ tab.le(i)[:n, :]
        ratio = mass / lengths
        t = int(np.argmax(ratio))
        if ratio[t] > best:
            best, arg = float(ratio[t]), (t, i)
    t, i = arg
    top = tab.tritiles[t]
    members = tuple(seq.universe[p] for p in np.flatnonzero(tab.le(i)[:n, t]))
    return SizeResult(math.sqrt(max(best, 0.0)), Tree(top, members, i))


# ---------------------------------------------------------------------------
# energy


@dataclass(frozen=True)
class Bracket:
    """A value known exactly, or only between ``lower`` and ``upper``."""

    lower: float
    upper: float
    exact: bool
    detail: dict = field(default_factory=dict, compare=False)

    @property
    def value(self) -> float:
        if not self.exact:
            raise ValueError("only a bracket is available")
        return self.lower

    def __contains__(self, x: float) -> bool:
        tol = 1e-12 * max(1.0, abs(self.upper))
        return self.lower - tol <= x <= self.upper + tol


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _max_weight_independent(weights: Sequence[float], conflict: Sequence[int]) -> tuple[float, int]:
    """Exact maximum-weight independent set by branch and bound over bitmasks."""
    n = len(weights)
    order = sorted(range(n), key=lambda p: -weights[p])
    best = [0.0, 0]

    def rec(pos: int, allowed: int, chosen: int, total: float, remaining: float):
        if total > best[0]:
            best[0], best[1] = total, chosen
        if pos == n or total + remaining <= best[0]:
            return
        p = order[pos]
        rest = remaining - weights[p]
        if allowed >> p & 1:
            rec(pos + 1, allowed & ~conflict[p] & ~(1 << p), chosen | 1 << p, total + weights[p], rest)
        rec(pos + 1, allowed & ~(1 << p), chosen, total, rest)

    rec(0, (1 << n) - 1, 0, 0.0, float(sum(weights)))
    return best[0], best[1]


def _energy_conflicts(seq: CoefficientSequence) -> list[int]:
    meet = seq.table.tile_meet(seq.slot)
    return [sum(1 << q for q in np.flatnonzero(meet[p]) if q != p) for p in range(len(seq))]


def energy(seq: CoefficientSequence, budget: int = ENERGY_BUDGET) -> Bracket:
    """Largest l2 mass over subsets whose ``slot``-th tiles are pairwise disjoint.

    Up to ``budget`` tri-tiles the search is exact. Beyond it a greedy
    disjoint selection gives the lower end and the full l2 norm the upper end.
    """
    n = len(seq)
    if n == 0:
        return Bracket(0.0, 0.0, True)
    w = [float(x) for x in seq.abs2]
    conflict = _energy_conflicts(seq)
    if n <= budget:
        total, chosen = _max_weight_independent(w, conflict)
        v = math.sqrt(total)
        return Bracket(v, v, True, {"selection": chosen})
    taken, blocked, total = 0, 0, 0.0
    for p in sorted(range(n), key=lambda p: -w[p]):
        if not blocked >> p & 1:
            taken |= 1 << p
            blocked |= conflict[p] | 1 << p
            total += w[p]
    return Bracket(math.sqrt(total), math.sqrt(sum(w)), False, {"selection": taken})


# ---------------------------------------------------------------------------
# modified energy


@dataclass(frozen=True)
class CandidateTree:
    mask: int
    top: int
    kind: int
    n_lo: int
    n_hi: int


class _TreeGeometry:
    """Bitmask view of a universe for tree searches in slot ``j``."""

    def __init__(self, seq: CoefficientSequence):
        tab = seq.table
        n = len(seq)
        j = seq.slot
        self.n = n
        self.seq = seq
        self.w = [float(x) for x in seq.abs2]
        self.length = [float(t.I.length) for t in seq.universe]
        # below[t][q]: members p with P_{p,t} <= P_{q,t}
        self.below = {t: [_col_mask(tab.le(t), q) for q in range(n)] for t in (1, 2, 3)}
        same = tab.same_tile(j)
        dmeet = tab.double_meet(j)
        self.same = [_row_mask(same, p) for p in range(n)]
        self.dmeet = [_row_mask(dmeet, p) for p in range(n)]
        self.I_meet = [_row_mask(tab.I_meet, q) for q in range(n)]

    def mass(self, mask: int) -> float:
        return sum(self.w[p] for p in _bits(mask))

    def n_window(self, mask: int, top: int) -> tuple[int, int]:
        """Integers ``n`` for which the tree passes both per-tree conditions."""
        tot = self.mass(mask)
        if tot == 0:
            return (1, 0)
        hi = _floor_log4(tot / self.length[top])
        lo = -(10**9)
        for q in list(_bits(mask)) + [top]:
            for t in (1, 2, 3):
                m = self.mass(mask & self.below[t][q])
                if m > 0:
                    lo = max(lo, _ceil_log4(m / self.length[q]) - 1)
        return lo, hi

    def compatible(self, a: CandidateTree, b: CandidateTree) -> bool:
        """Strong ``j``-disjointness of two candidate trees."""
        if a.mask & b.mask:
            return False
        for p in _bits(a.mask):
            if self.same[p] & b.mask:
                return False
            d = self.dmeet[p] & b.mask
            if d and (d & self.I_meet[a.top] or self.I_meet[b.top] >> p & 1):
                return False
        return True

    def candidates(self) -> list[CandidateTree]:
        seen = {}
        for top in range(self.n):
            for kind in (1, 2, 3):
                full = self.below[kind][top]
                sub = full
                while sub:
                    lo, hi = self.n_window(sub, top)
                    if lo <= hi:
                        key = (sub, self.seq.universe[top].I, lo, hi)
                        seen.setdefault(key, CandidateTree(sub, top, kind, lo, hi))
                    sub = (sub - 1) & full
        return list(seen.values())


def _col_mask(mat: np.ndarray, q: int) -> int:
    return sum(1 << int(p) for p in np.flatnonzero(mat[:, q]))


def _row_mask(mat: np.ndarray, p: int) -> int:
    return sum(1 << int(q) for q in np.flatnonzero(mat[p, :]))


def _floor_log4(x: float) -> int:
    """Largest ``n`` with ``4^n <= x``, exact for floats."""
    n = math.floor(math.log(x, 4))
    while 4.0**n > x:
        n -= 1
    while 4.0 ** (n + 1) <= x:
        n += 1
    return n


def _ceil_log4(x: float) -> int:
    """Smallest ``n`` with ``x <= 4^n``."""
    n = math.ceil(math.log(x, 4))
    while 4.0 ** (n - 1) >= x:
        n -= 1
    while 4.0**n < x:
        n += 1
    return n


def _best_collection(geo: _TreeGeometry, cands: list[CandidateTree]) -> tuple[float, list[CandidateTree]]:
    """Maximum of the summed top lengths over pairwise compatible candidates."""
    by_low: dict[int, list[CandidateTree]] = {}
    for c in cands:
        low = (c.mask & -c.mask).bit_length() - 1
        by_low.setdefault(low, []).append(c)
    for lst in by_low.values():
        lst.sort(key=lambda c: -geo.length[c.top])
    cap = [max((geo.length[c.top] for c in by_low.get(k, [])), default=0.0) for k in range(geo.n)]
    best = [0.0, []]

    def rec(k: int, covered: int, chosen: list, total: float):
        if total > best[0]:
            best[0], best[1] = total, list(chosen)
        if k >= geo.n:
            return
        bound = total + sum(cap[m] for m in range(k, geo.n) if not covered >> m & 1)
        if bound <= best[0]:
            return
        if not covered >> k & 1:
            for c in by_low.get(k, []):
                if c.mask & covered:
                    continue
                if all(geo.compatible(c, d) for d in chosen):
                    chosen.append(c)
                    rec(k + 1, covered | c.mask, chosen, total + geo.length[c.top])
                    chosen.pop()
        rec(k + 1, covered, chosen, total)

    rec(0, 0, [], 0.0)
    return best[0], best[1]


def modified_energy_range(seq: CoefficientSequence) -> tuple[int, int] | None:
    """Scales ``n`` outside of which no tree collection is admissible."""
    a = np.abs(seq.values)
    if len(seq) == 0 or not np.any(a > 0):
        return None
    lengths = np.array([float(t.I.length) for t in seq.universe])
    lo = math.floor(math.log2(float(a[a > 0].min()) / math.sqrt(lengths.max()))) - 1
    hi = math.ceil(math.log2(math.sqrt(float(np.sum(a * a)) / lengths.min())))
    return lo, hi


def _to_trees(geo: _TreeGeometry, chosen: Sequence[CandidateTree]) -> list[Tree]:
    u = geo.seq.universe
    return [Tree(u[c.top], tuple(u[p] for p in _bits(c.mask)), c.kind) for c in chosen]


def modified_energy(seq: CoefficientSequence, exact_limit: int = MODIFIED_EXACT_LIMIT) -> Bracket:
    """Supremum over ``n`` and strongly disjoint tree collections of ``2^n (sum |I_T|)^(1/2)``.

    Trees may be of any kind with tops in the universe. Sub-trees of ``T``
    are the sets ``{P in T : P_t <= P'_t}`` with ``P'`` a member or the top
    of ``T`` and ``t`` any kind. Exact up to ``exact_limit`` tri-tiles,
    otherwise a bracket between the best collection found among the
    selection-algorithm trees and the energy.
    """
    rng = modified_energy_range(seq)
    if rng is None:
        return Bracket(0.0, 0.0, True, {"n": None, "trees": []})
    if len(seq) <= exact_limit:
        geo = _TreeGeometry(seq)
        cands = geo.candidates()
        best = (0.0, None, [])
        for n in range(rng[0], rng[1] + 1):
            pool = [c for c in cands if c.n_lo <= n <= c.n_hi]
            if not pool:
                continue
            total, chosen = _best_collection(geo, pool)
            v = 2.0**n * math.sqrt(total)
            if v > best[0]:
                best = (v, n, chosen)
        v, n, chosen = best
        return Bracket(v, v, True, {"n": n, "trees": _to_trees(geo, chosen)})
    lower, n, trees = modified_energy_lower(seq)
    upper = energy(seq).upper
    return Bracket(lower, max(lower, upper), False, {"n": n, "trees": trees})


def admissible_window(seq: CoefficientSequence, tree: Tree) -> tuple[int, int]:
    """Scales at which one tree passes the per-tree conditions of the modified energy."""
    tab = seq.table
    n = len(seq)
    w = seq.abs2
    members = np.zeros(n, dtype=bool)
    for p in tree.members:
        members[tab.index(p)] = True
    tot = float(w[members].sum())
    if tot == 0:
        return (1, 0)
    hi = _floor_log4(tot / float(tree.I.length))
    lo = -(10**9)
    tops = list(tree.members) + ([tree.top] if tree.top not in set(tree.members) else [])
    ext = tab if tree.top in tab._positions else TileTable(list(seq.universe) + [tree.top], seq.constants)
    for q in tops:
        qi = ext.index(q)
        for t in (1, 2, 3):
            sub = members & ext.le(t)[:n, qi]
            if sub.any():
                lo = max(lo, _ceil_log4(float(w[sub].sum()) / float(q.I.length)) - 1)
    return lo, hi


def modified_energy_lower(seq: CoefficientSequence) -> tuple[float, int | None, list[Tree]]:
    """Certified lower bound: greedy admissible collections over the scanned scales.

    Candidates are the trees produced by the selection algorithm at each
    scale, all maximal trees, and singletons. Each reported collection is
    admissible and strongly disjoint by explicit check.
    """
    from .decomp import select_trees  # local import: decomp builds on this module

    rng = modified_energy_range(seq)
    if rng is None:
        return 0.0, None, []
    tab = seq.table
    u = seq.universe
    pool: list[Tree] = []
    for p in u:
        pool.append(Tree(p, (p,), 1))
        for kind in (1, 2, 3):
            members = tuple(u[q] for q in np.flatnonzero(tab.le(kind)[:, tab.index(p)]))
            pool.append(Tree(p, members, kind))
    for n in range(rng[0], rng[1] + 1):
        try:
            trace = select_trees(seq, n, normalize=False)
        except ValueError:
            continue
        pool.extend(trace.trees)
    windows = [(t, admissible_window(seq, t)) for t in pool]
    from .tiles import check_strongly_disjoint

    best = (0.0, None, [])
    for n in range(rng[0], rng[1] + 1):
        ok = sorted((t for t, (lo, hi) in windows if lo <= n <= hi), key=lambda t: -t.I.length)
        chosen: list[Tree] = []
        for t in ok:
            if check_strongly_disjoint(chosen + [t], seq.slot):
                chosen.append(t)
        total = sum(float(t.I.length) for t in chosen)
        v = 2.0**n * math.sqrt(total)
        if v > best[0]:
            best = (v, n, chosen)
    return best


# ---------------------------------------------------------------------------
# dual witness


@dataclass(frozen=True)
class DualWitness:
    trees: list[Tree]
    c: CoefficientSequence
    n: int | None
    pairing: complex
    modified_energy: float


def dual_energy_witness(seq: CoefficientSequence, exact_limit: int = MODIFIED_EXACT_LIMIT) -> DualWitness:
    """Extremal trees and the rescaled coefficients ``2^-n (sum |I_T|)^(-1/2) a`` on them."""
    me = modified_energy(seq, exact_limit)
    trees = me.detail["trees"]
    n = me.detail["n"]
    if not trees:
        return DualWitness([], seq.with_values(np.zeros(len(seq))), None, 0j, 0.0)
    total = sum(float(t.I.length) for t in trees)
    scale = 2.0 ** (-n) / math.sqrt(total)
    c = np.zeros(len(seq), dtype=np.complex128)
    for t in trees:
        for p in t.members:
            k = seq.table.index(p)
            c[k] = scale * seq.values[k]
    pairing = complex(np.sum(seq.values * np.conj(c)))
    return DualWitness(trees, seq.with_values(c), n, pairing, me.lower)


def witness_normalization(w: DualWitness) -> float:
    """Largest ``sum_{T'} |c|^2 (sum |I_T|) / |I_{T'}|`` over the sub-trees used by the modified energy."""
    if not w.trees:
        return 0.0
    total = sum(float(t.I.length) for t in w.trees)
    seq = w.c
    tab = seq.table
    c2 = seq.abs2
    worst = 0.0
    for t in w.trees:
        members = np.zeros(len(seq), dtype=bool)
        for p in t.members:
            members[tab.index(p)] = True
        tops = list(t.members) + ([t.top] if t.top not in set(t.members) else [])
        for q in tops:
            if q not in tab._positions:
                continue
            for kind in (1, 2, 3):
                sub = members & tab.le(kind)[:, tab.index(q)]
                worst = max(worst, float(c2[sub].sum()) * total / float(q.I.length))
    return worst


# ---------------------------------------------------------------------------
# weak L1 and the square-function comparison


def weak_l1(pieces: Sequence[tuple], interval: tuple) -> float:
    """``sup_lambda lambda |{x in I : f(x) > lambda}|`` for piecewise constant ``f >= 0``.

    ``pieces`` lists ``(lo, hi, value)`` with disjoint supports. The sup is
    approached as ``lambda`` rises to each attained value.
    """
    a, b = interval
    parts = []
    for lo, hi, v in pieces:
        lo, hi = max(lo, a), min(hi, b)
        if hi > lo and v > 0:
            parts.append((float(v), float(hi - lo)))
    parts.sort(reverse=True)
    best, measure_ge = 0.0, 0.0
    k = 0
    while k < len(parts):
        v = parts[k][0]
        while k < len(parts) and parts[k][0] == v:
            measure_ge += parts[k][1]
            k += 1
        best = max(best, v * measure_ge)
    return best


def square_function(seq: CoefficientSequence, tree: Tree) -> list[tuple]:
    """Pieces of ``(sum_{P in T} |a_P|^2 1_{I_P} / |I_P|)^(1/2)`` on ``I_T``."""
    pts = {tree.I.lo, tree.I.hi}
    for p in tree.members:
        pts.update(p.I.bounds)
    pts = sorted(x for x in pts if tree.I.lo <= x <= tree.I.hi)
    pieces = []
    for lo, hi in zip(pts, pts[1:]):
        mid = (lo + hi) / 2
        s = sum(abs(seq[p]) ** 2 / float(p.I.length) for p in tree.members if mid in p.I)
        pieces.append((lo, hi, math.sqrt(s)))
    return pieces


@dataclass(frozen=True)
class JNComparison:
    size: float
    weak: float
    ratio: float


def jn_compare(seq: CoefficientSequence) -> JNComparison:
    """Size against the weak-L1 square-function norm over maximal trees."""
    lhs = size(seq).value
    tab = seq.table
    u = seq.universe
    rhs = 0.0
    for i in (1, 2, 3):
        if i == seq.slot:
            continue
        for q, top in enumerate(u):
            members = tuple(u[p] for p in np.flatnonzero(tab.le(i)[:, q]))
            tree = Tree(top, members, i)
            val = weak_l1(square_function(seq, tree), tree.I.bounds) / float(top.I.length)
            rhs = max(rhs, val)
    if lhs == 0 and rhs == 0:
        return JNComparison(0.0, 0.0, 1.0)
    return JNComparison(lhs, rhs, rhs / lhs if lhs else math.inf)
