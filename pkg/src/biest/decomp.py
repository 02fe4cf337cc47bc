"""Single-tree estimate, greedy tree selection, level partition and the size-energy bound."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .functionals import CoefficientSequence, energy, modified_energy, size
from .grid import ShiftedInterval
from .tiles import DESK, OrderConstants, Tile, Tree, TriTile, check_strongly_disjoint, tritile_to_json

SELECTION_CONSTANT = 2**6


# ---------------------------------------------------------------------------
# single tree


@dataclass(frozen=True)
class TreeFormResult:
    value: complex
    bound: float
    sizes: tuple[float, float, float]

    @property
    def holds(self) -> bool:
        return abs(self.value) <= self.bound * (1 + 1e-12)


def trilinear_sum(universe: Sequence[TriTile], a1, a2, a3) -> complex:
    """``sum_P |I_P|^(-1/2) a1 a2 a3`` over the given tri-tiles."""
    total = 0j
    for p in universe:
        total += a1[p] * a2[p] * a3[p] / math.sqrt(float(p.I.length))
    return total


def tree_form(tree: Tree, a1: CoefficientSequence, a2: CoefficientSequence, a3: CoefficientSequence) -> TreeFormResult:
    """The trilinear sum over a tree and the bound ``|I_T| prod_j size_j``.

    Sizes are taken over the tree's members; the tree's own top is allowed
    as a top because the estimate uses ``T`` itself as a tree.
    """
    value = trilinear_sum(tree.members, a1, a2, a3)
    sizes = tuple(size(a.restrict(tree.members), extra_tops=[tree.top]).value for a in (a1, a2, a3))
    bound = float(tree.I.length) * sizes[0] * sizes[1] * sizes[2]
    return TreeFormResult(value, bound, sizes)


def random_tree(seed: int, count: int, kind: int | None = None, constants: OrderConstants = DESK) -> tuple[Tree, list]:
    """A ``kind``-tree with ``count`` distinct members and random complex coefficients.

    Members sit at finer scales inside the top's interval with their
    ``kind``-th frequency interval containing the top's center, which gives
    ``P_kind <= top_kind``. Returns the tree and three coefficient maps.
    """
    rng = np.random.default_rng(seed)
    kind = kind or int(rng.integers(1, 4))
    top_exp = 0
    top_k = int(rng.integers(0, 4))
    top_f = [int(rng.integers(-20, 20)) for _ in range(3)]
    top = TriTile(tuple(Tile(ShiftedInterval(top_exp, top_k), ShiftedInterval(0, f), i + 1) for i, f in enumerate(top_f)))
    members: dict[TriTile, None] = {}
    if rng.random() < 0.5:
        members[top] = None
    while len(members) < count:
        s = -int(rng.integers(2, 6))
        n_sub = 2 ** (top_exp - s)
        k = top_k * n_sub + int(rng.integers(0, n_sub))
        tiles = []
        for i in range(3):
            L = Fraction(2) ** (-s)
            if i + 1 == kind:
                f = math.floor(top[kind].xi / L)
            else:
                f = math.floor(top[i + 1].xi / L) + int(rng.integers(-3, 4))
            tiles.append(Tile(ShiftedInterval(s, k), ShiftedInterval(-s, f), i + 1))
        members[TriTile(tuple(tiles))] = None
    tree = Tree(top, tuple(members), kind)
    assert tree.is_valid(constants)
    coeffs = []
    for _ in range(3):
        scale = np.exp(rng.normal(0, 1.5, size=count))
        vals = scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
        coeffs.append(dict(zip(tree.members, vals)))
    return tree, coeffs


# ---------------------------------------------------------------------------
# selection


@dataclass
class SelectedPair:
    tree: Tree
    companion: Tree
    label: str  # "up" or "down"
    mass: float


@dataclass
class SelectionTrace:
    n: int
    slot: int
    energy_norm: float
    threshold: float
    pairs: list[SelectedPair]
    remainder: list[TriTile]
    checks: dict = field(default_factory=dict)

    @property
    def trees(self) -> list[Tree]:
        return [p.tree for p in self.pairs]

    @property
    def cover(self) -> list[Tree]:
        return [t for p in self.pairs for t in (p.tree, p.companion) if t.members]

    @property
    def removed(self) -> list[TriTile]:
        return [q for t in self.cover for q in t.members]

    def cover_length(self) -> float:
        return sum(float(t.I.length) for t in self.cover)

    def to_json(self) -> str:
        rec = {
            "n": self.n,
            "slot": self.slot,
            "energy_norm": self.energy_norm,
            "threshold": self.threshold,
            "trees": [
                {
                    "pass": p.label,
                    "kind": p.tree.kind,
                    "top": tritile_to_json(p.tree.top),
                    "members": [tritile_to_json(q) for q in p.tree.members],
                    "companion": [tritile_to_json(q) for q in p.companion.members],
                    "mass": p.mass,
                    "threshold": self.threshold * float(p.tree.I.length),
                }
                for p in self.pairs
            ],
            "remainder": [tritile_to_json(q) for q in self.remainder],
            "checks": self.checks,
        }
        return json.dumps(rec, indent=1)


def _pick(cands, xi2, lengths, lows, maximize: bool):
    """Primary: extreme frequency center; secondary: inclusion-maximal; then ties."""
    best_xi = max(xi2[t] for t, _, _ in cands) if maximize else min(xi2[t] for t, _, _ in cands)
    pool = [c for c in cands if xi2[c[0]] == best_xi]
    maximal = [c for c in pool if not any(c[2] != d[2] and c[2] & d[2] == c[2] for d in pool)]
    maximal.sort(key=lambda c: (-lengths[c[0]], lows[c[0]], c[0], c[1]))
    return maximal[0]


def select_trees(
    seq: CoefficientSequence,
    n: int,
    energy_norm: float | None = None,
    normalize: bool = True,
    check: bool = True,
) -> SelectionTrace:
    """Greedy upward then downward tree removal at level ``n`` in slot ``seq.slot``.

    Coefficients are divided by ``energy_norm`` (default: the energy upper
    bound; ``1`` when ``normalize`` is false). An upward candidate with top
    ``t`` and kind ``i != slot`` weighs ``t`` together with every remaining
    ``P`` with ``P_i <= t_i`` and ``P_slot`` in the upper ``lesssim'``
    cone of ``t_slot``; it is eligible when its mass reaches
    ``2^(-2n-3) |I_t|``. The selected tree keeps the cone members only;
    its top leaves with the companion ``{P : P_slot <= t_slot}``, which
    always contains it.
    """
    j = seq.slot
    if energy_norm is None:
        energy_norm = energy(seq).upper if normalize else 1.0
    if energy_norm <= 0:
        if np.any(seq.values != 0):
            raise ValueError("energy_norm must be positive")
        energy_norm = 1.0
    thr = 2.0 ** (-2 * n - 3)
    if check:
        s = size(seq).value
        if s > 2.0 ** (-n) * energy_norm * (1 + 1e-12):
            raise ValueError(f"size {s} exceeds 2^-n energy_norm = {2.0 ** -n * energy_norm}")
    tab = seq.table
    N = len(seq)
    w = seq.abs2 / energy_norm**2
    lengths = tab.I_length
    lows = [p.I.lo for p in seq.universe]
    xi2 = tab.xi2(j)
    le_j = tab.le(j)
    kinds = [i for i in (1, 2, 3) if i != j]
    rel = {
        (label, i): tab.le(i) & (tab.lesssim_plus(j) if label == "up" else tab.lesssim_minus(j))
        for label in ("up", "down")
        for i in kinds
    }
    alive = np.ones(N, dtype=bool)
    pairs: list[SelectedPair] = []
    for label in ("up", "down"):
        while True:
            cands = []
            for i in kinds:
                M = rel[(label, i)] & alive[:, None]
                mass = w @ M + w
                for t in np.flatnonzero(alive & (mass >= thr * lengths)):
                    members = np.flatnonzero(M[:, t])
                    mask = (1 << int(t)) | sum(1 << int(p) for p in members)
                    cands.append((int(t), i, mask))
            if not cands:
                break
            t, i, mask = _pick(cands, xi2, lengths, lows, maximize=(label == "up"))
            idx = [p for p in range(N) if mask >> p & 1 and p != t]
            for p in idx:
                alive[p] = False
            comp = [int(p) for p in np.flatnonzero(alive & le_j[:, t])]
            for p in comp:
                alive[p] = False
            u = seq.universe
            tree = Tree(u[t], tuple(u[p] for p in idx), i, label)
            companion = Tree(u[t], tuple(u[p] for p in comp), j, label)
            pairs.append(SelectedPair(tree, companion, label, float(w[idx].sum() + w[t])))
    remainder = [seq.universe[p] for p in np.flatnonzero(alive)]
    trace = SelectionTrace(n, j, float(energy_norm), thr, pairs, remainder)
    if check:
        trace.checks = selection_checks(seq, trace)
    return trace


def remainder_thresholds(seq: CoefficientSequence, trace: SelectionTrace) -> tuple[bool, bool]:
    """Strict upper and lower cone thresholds for every tree with top in the remainder."""
    tab = seq.table
    rest = np.zeros(len(seq), dtype=bool)
    for p in trace.remainder:
        rest[tab.index(p)] = True
    w = seq.abs2 / trace.energy_norm**2
    lengths = tab.I_length
    out = []
    for cone in (tab.lesssim_plus(trace.slot), tab.lesssim_minus(trace.slot)):
        ok = True
        for i in (1, 2, 3):
            if i == trace.slot:
                continue
            mass = (w * rest) @ (tab.le(i) & cone) + w
            ok &= bool(np.all((mass < trace.threshold * lengths)[rest]))
        out.append(ok)
    return tuple(out)


def selection_checks(seq: CoefficientSequence, trace: SelectionTrace) -> dict:
    plus_left, plus_right = remainder_thresholds(seq, trace)
    trees = trace.trees
    disjoint = bool(check_strongly_disjoint(trees, trace.slot))
    rest = seq.restrict(trace.remainder)
    rem_size = size(rest).value / trace.energy_norm if len(rest) else 0.0
    cover = trace.cover_length()
    return {
        "plus_left": plus_left,
        "plus_right": plus_right,
        "strongly_disjoint": disjoint,
        "remainder_size": rem_size,
        "size_lower": rem_size <= 2.0 ** (-trace.n - 1) * (1 + 1e-12),
        "cover_length": cover,
        "cover_bound": cover <= SELECTION_CONSTANT * 4.0**trace.n,
    }


def selection_instance(seed: int, count: int = 40, constants: OrderConstants = DESK) -> CoefficientSequence:
    """Seeded rank-one family with log-normal complex coefficients in slot ``1 + seed % 3``."""
    from .tiles import gen_rank1

    universe = tuple(gen_rank1(seed, count, (0, 10), constants))
    rng = np.random.default_rng(seed)
    n = len(universe)
    vals = np.exp(rng.normal(0, 1, n)) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return CoefficientSequence(universe, vals, 1 + seed % 3, constants)


def selection_run(seq: CoefficientSequence, levels: int = 4) -> list[SelectionTrace]:
    """Successive checked selections from the first admissible level, each on the previous remainder."""
    e = energy(seq).upper
    n = -math.ceil(math.log2(size(seq).value / e))
    out = []
    cur = seq
    for nn in range(n, n + levels):
        if len(cur) == 0:
            break
        trace = select_trees(cur, nn, e)
        out.append(trace)
        cur = cur.restrict(trace.remainder)
    return out


def selection_violations(traces: Sequence[SelectionTrace]) -> dict:
    """Count of failed boolean postconditions by name."""
    viol: dict[str, int] = {}
    for tr in traces:
        for k, v in tr.checks.items():
            if v is False:
                viol[k] = viol.get(k, 0) + 1
    return viol


# ---------------------------------------------------------------------------
# partition


@dataclass
class Level:
    n: int
    tiles: list[TriTile]
    trees: list[Tree]
    traces: list[SelectionTrace]

    def cover_length(self) -> float:
        return sum(float(t.I.length) for t in self.trees)


def partition(
    a1: CoefficientSequence,
    a2: CoefficientSequence,
    a3: CoefficientSequence,
    energy_norms: Sequence[float] | None = None,
    max_levels: int = 200,
) -> list[Level]:
    """Levels ``n`` with tree covers, obtained by running the selection in slots 1, 2, 3 in turn."""
    seqs = (a1, a2, a3)
    universe = list(a1.universe)
    if any(list(a.universe) != universe for a in seqs):
        raise ValueError("sequences must share one universe")
    stacked = np.abs(np.vstack([a.values for a in seqs]))
    if np.any(stacked.max(axis=0) == 0):
        raise ValueError("every tri-tile needs a nonzero coefficient in some slot")
    if energy_norms is None:
        energy_norms = [energy(a).upper for a in seqs]
    sizes = [size(a).value for a in seqs]
    ratios = [e / s for e, s in zip(energy_norms, sizes) if s > 0]
    n = min(math.floor(math.log2(r)) for r in ratios)
    current = universe
    levels: list[Level] = []
    for _ in range(max_levels):
        if not current:
            break
        taken: list[TriTile] = []
        trees: list[Tree] = []
        traces = []
        for a, e in zip(seqs, energy_norms):
            sub = a.restrict(current)
            if not np.any(sub.values != 0):
                continue
            trace = select_trees(sub, n, energy_norm=e, check=False)
            traces.append(trace)
            taken += trace.removed
            trees += trace.cover
            current = trace.remainder
        if taken:
            levels.append(Level(n, taken, trees, traces))
        n += 1
    else:
        raise RuntimeError("partition did not absorb every tri-tile")
    return levels


# ---------------------------------------------------------------------------
# the abstract bound


@dataclass(frozen=True)
class AbstractBound:
    lhs: float
    rhs: float
    ratio: float
    refined_rhs: float
    refined_ratio: float
    sizes: tuple
    energies: tuple
    exact: bool


def abstract_bound(a1, a2, a3, theta: Sequence[float]) -> AbstractBound:
    """Compare the trilinear sum with ``prod size^theta energy^(1-theta)`` and the logarithmic bound."""
    theta = tuple(float(t) for t in theta)
    if len(theta) != 3 or any(not 0 <= t < 1 for t in theta) or abs(sum(theta) - 1) > 1e-12:
        raise ValueError("need 0 <= theta_j < 1 with sum 1")
    seqs = (a1, a2, a3)
    lhs = abs(trilinear_sum(a1.universe, a1, a2, a3))
    S = tuple(size(a).value for a in seqs)
    brackets = [modified_energy(a) for a in seqs]
    E = tuple(b.upper for b in brackets)
    rhs = float(np.prod([s**t * e ** (1 - t) for s, e, t in zip(S, E, theta)]))
    if min(S) > 0:
        order = sorted(range(3), key=lambda k: E[k] / S[k])
        e1, e2, e3 = (E[k] for k in order)
        s1, s2, s3 = (S[k] for k in order)
        refined = e1 * e2 * s3 * math.log(1 + (e3 / s3) / (e2 / s2))
    else:
        refined = 0.0
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    rref = lhs / refined if refined > 0 else (0.0 if lhs == 0 else math.inf)
    return AbstractBound(lhs, rhs, ratio, refined, rref, S, E, all(b.exact for b in brackets))


def random_instance(seed: int, count_range=(3, 12), constants: OrderConstants = DESK):
    """Seeded rank-one universe with three independent complex coefficient sequences."""
    from .tiles import gen_rank1

    rng = np.random.default_rng(seed)
    n = int(rng.integers(count_range[0], count_range[1] + 1))
    universe = tuple(gen_rank1(seed, n, (-10, 0), constants))
    return tuple(
        CoefficientSequence(universe, rng.normal(size=len(universe)) + 1j * rng.normal(size=len(universe)), j, constants)
        for j in (1, 2, 3)
    )


def jn_instance(seed: int, count: int = 30) -> CoefficientSequence:
    """Coefficients of a random ``count``-member tree in a slot other than the tree's kind."""
    tree, maps = random_tree(seed, count)
    slot = 1 + tree.kind % 3
    return CoefficientSequence.from_map(maps[slot - 1], slot, DESK)


def level_sum_bound(levels: Sequence[Level], seqs, energy_norms, sizes) -> list[tuple[int, float, float]]:
    """Per level: summed tree forms against ``sum |I_T| prod min(2^-n E_j, S_j)``."""
    out = []
    for lev in levels:
        lhs = 0.0
        for tree in lev.trees:
            lhs += abs(trilinear_sum(tree.members, *seqs))
        factor = np.prod([min(2.0 ** (-lev.n) * e, s) for e, s in zip(energy_norms, sizes)])
        out.append((lev.n, lhs, lev.cover_length() * float(factor)))
    return out
