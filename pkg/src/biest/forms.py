"""Model forms built from wave packets, exceptional sets and restricted-type experiments.

Inner products are linear in the first slot and conjugate-linear in the
second. Tri-tile collections are evaluated on one periodic sampling grid
shared by every function and packet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .functionals import CoefficientSequence, modified_energy, size
from .grid import ApproxCutoff, as_fraction, contains, cutoff_value, dyadic_intervals_of, maximal_superlevel, measure
from .packets import SampledFunction, WavePacket, inner, make_packet
from .tiles import DESK, OrderConstants, Tile, Tree, TriTile, check_rank1, make_tritile, order_le

WINDOW_L = 16
WINDOW_N = 1024

# ---------------------------------------------------------------------------
# exponents

_H = Fraction(1, 2)
VERTICES: dict[str, tuple[Fraction, ...]] = {
    "A1": (Fraction(1), _H, Fraction(1), Fraction(-3, 2)),
    "A2": (_H, Fraction(1), Fraction(1), Fraction(-3, 2)),
    "A3": (_H, Fraction(1), Fraction(-3, 2), Fraction(1)),
    "A4": (Fraction(1), _H, Fraction(-3, 2), Fraction(1)),
    "A5": (Fraction(1), -_H, Fraction(0), _H),
    "A6": (Fraction(1), -_H, _H, Fraction(0)),
    "A7": (_H, -_H, Fraction(0), Fraction(1)),
    "A8": (_H, -_H, Fraction(1), Fraction(0)),
    "A9": (-_H, Fraction(1), Fraction(0), _H),
    "A10": (-_H, Fraction(1), _H, Fraction(0)),
    "A11": (-_H, _H, Fraction(1), Fraction(0)),
    "A12": (-_H, _H, Fraction(0), Fraction(1)),
}
# the second family exchanges the first and third entries
VERTICES.update({"B" + k[1:]: (v[2], v[1], v[0], v[3]) for k, v in list(VERTICES.items())})

BHT_VERTEX = (Fraction(1), _H, -_H)

# experiment exponents, each within 0.05 of its vertex in the sup norm
EXPERIMENT_ALPHA = {
    "A2": (0.53, 0.96, 0.97, -1.46),
    "A9": (-0.47, 0.96, 0.03, 0.48),
    "bht": (0.97, 0.52, -0.49),
}


@dataclass(frozen=True)
class AdmissibleTuple:
    """Reciprocal exponents summing to one, each below one, at most one negative."""

    alpha: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.alpha)
        if not math.isclose(sum(a), 1.0, abs_tol=1e-12):
            raise ValueError("entries must sum to one")
        if any(x >= 1 for x in a):
            raise ValueError("every entry must be below one")
        if sum(x < 0 for x in a) > 1:
            raise ValueError("at most one entry may be negative")
        object.__setattr__(self, "alpha", a)

    @property
    def bad_index(self) -> int | None:
        """One-based position of the negative entry, if any."""
        for i, x in enumerate(self.alpha):
            if x < 0:
                return i + 1
        return None

    def distance(self, vertex: str | Sequence) -> float:
        v = VERTICES[vertex] if isinstance(vertex, str) else vertex
        return max(abs(a - float(b)) for a, b in zip(self.alpha, v))

    def weight(self, measures: Sequence[float]) -> float:
        """``prod |E_j|^alpha_j``."""
        return float(np.prod([float(m) ** a for m, a in zip(measures, self.alpha)]))


@dataclass(frozen=True)
class Exponents:
    theta1: float
    theta2: float
    theta3: float
    theta: float | None

    def as_tuple(self) -> tuple:
        return (self.theta1, self.theta2, self.theta3, self.theta)


def exponents_for_vertex(alpha: AdmissibleTuple | Sequence, vertex: str) -> Exponents:
    """Interpolation exponents used near ``vertex``; validates ``0 < theta_j < 1`` and ``sum = 1``.

    A9 to A12 (negative first entry) and A1, A2 (negative fourth entry)
    use their own assignments; the remaining vertices use the variants
    obtained by exchanging indices 1 and 2, respectively 3 and 4.
    """
    if not isinstance(alpha, AdmissibleTuple):
        alpha = AdmissibleTuple(tuple(alpha))
    a1, a2, a3, a4 = alpha.alpha
    name = vertex.upper()
    if name.startswith("B"):
        a1, a3 = a3, a1
        name = "A" + name[1:]
    idx = int(name[1:])
    if a3 + a4 == 0:
        raise ValueError("the last two entries must not cancel")
    if 9 <= idx <= 12:
        t = (2 * a1 + 1, 2 * a2 - 1, 2 * (a3 + a4) - 1, a4 / (a3 + a4))
    elif 5 <= idx <= 8:
        t = (2 * a1 - 1, 2 * a2 + 1, 2 * (a3 + a4) - 1, a4 / (a3 + a4))
    elif idx in (1, 2):
        t = (2 * a1 - 1, 2 * a2 - 1, 2 * (a3 + a4) + 1, (3 * a3 + 2 * a4) / (a3 + a4))
    elif idx in (3, 4):
        t = (2 * a1 - 1, 2 * a2 - 1, 2 * (a3 + a4) + 1, (3 * a4 + 2 * a3) / (a3 + a4))
    else:
        raise ValueError(f"unknown vertex {vertex}")
    ex = Exponents(*t)
    _validate(ex.as_tuple()[:3], ex.theta)
    return ex


def exponents_bht(alpha: Sequence[float]) -> Exponents:
    """Exponents near ``(1, 1/2, -1/2)`` for the trilinear model form."""
    a1, a2, a3 = (float(x) for x in alpha)
    if not math.isclose(a1 + a2 + a3, 1.0, abs_tol=1e-12):
        raise ValueError("entries must sum to one")
    ex = Exponents(2 * a1 - 1, 2 * a2 - 1, 2 * a3 + 1, None)
    _validate(ex.as_tuple()[:3], None)
    return ex


def _validate(thetas, theta) -> None:
    if not all(0 < t < 1 for t in thetas):
        raise ValueError(f"exponents {thetas} leave (0, 1)")
    if not math.isclose(sum(thetas), 1.0, abs_tol=1e-12):
        raise ValueError("exponents must sum to one")
    if theta is not None and not 0 < theta < 1:
        raise ValueError(f"mixing exponent {theta} leaves (0, 1)")


# ---------------------------------------------------------------------------
# sets


@dataclass(frozen=True)
class MeasurableSetSpec:
    """Finite union of half-open intervals with dyadic endpoints, kept merged and sorted."""

    intervals: tuple

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(dyadic_intervals_of(self.intervals)))

    @property
    def measure(self) -> Fraction:
        return measure(self.intervals)

    def minus(self, other: "MeasurableSetSpec") -> "MeasurableSetSpec":
        out = []
        for lo, hi in self.intervals:
            pieces = [(lo, hi)]
            for a, b in other.intervals:
                nxt = []
                for x, y in pieces:
                    if b <= x or y <= a:
                        nxt.append((x, y))
                        continue
                    if x < a:
                        nxt.append((x, a))
                    if b < y:
                        nxt.append((b, y))
                pieces = nxt
            out.extend(pieces)
        return MeasurableSetSpec(tuple(out))

    def union(self, other: "MeasurableSetSpec") -> "MeasurableSetSpec":
        return MeasurableSetSpec(self.intervals + other.intervals)

    def contains_set(self, other: "MeasurableSetSpec") -> bool:
        return all(any(contains(big, small) for big in self.intervals) for small in other.intervals)

    def mask(self, L: float, N: int) -> np.ndarray:
        x = np.arange(N) * (L / N)
        m = np.zeros(N, dtype=bool)
        for lo, hi in self.intervals:
            m |= (x >= float(lo)) & (x < float(hi))
        return m

    def to_json(self) -> list:
        return [[str(a), str(b)] for a, b in self.intervals]


def random_set(rng: np.random.Generator, target: Fraction, window: float = WINDOW_L, piece_exp: int = -3) -> MeasurableSetSpec:
    """Union of random dyadic intervals of length ``2^piece_exp`` with total measure ``target``."""
    piece = Fraction(2) ** piece_exp
    slots = int(Fraction(window) / piece)
    count = int(as_fraction(target) / piece)
    if not 0 < count <= slots:
        raise ValueError("target measure must be a positive multiple of the piece length inside the window")
    # clustered placement: a few random runs
    chosen: set[int] = set()
    while len(chosen) < count:
        start = int(rng.integers(0, slots))
        run = int(rng.integers(1, max(2, count // 2) + 1))
        for s in range(start, min(slots, start + run)):
            if len(chosen) < count:
                chosen.add(s)
    return MeasurableSetSpec(tuple((s * piece, (s + 1) * piece) for s in sorted(chosen)))


def random_x_function(rng: np.random.Generator, E: MeasurableSetSpec, L: float = WINDOW_L, N: int = WINDOW_N) -> SampledFunction:
    """Independent unimodular samples on ``E`` and zero elsewhere; an element of ``X(E)``."""
    vals = np.exp(2j * np.pi * rng.random(N)) * E.mask(L, N)
    return SampledFunction(float(L), N, vals)


@dataclass
class ExceptionalSet:
    omega: MeasurableSetSpec
    major: MeasurableSetSpec
    pivot: int
    C: float

    @property
    def ok(self) -> bool:
        """Majority property of the remaining subset."""
        return 2 * self.major.measure >= self._pivot_measure

    _pivot_measure: Fraction = Fraction(0)


def exceptional_set(E: Sequence[MeasurableSetSpec], pivot: int, C: float = 8, strict: bool = False) -> ExceptionalSet:
    """Union over ``j`` of ``{M 1_{E_j} > C |E_j| / |E_pivot|}`` and the pivot set with it removed.

    ``pivot`` is one-based. With ``strict`` a failed majority raises
    ``ValueError`` (the constant is too small).
    """
    if C <= 0:
        raise ValueError("C must be positive")
    ep = E[pivot - 1]
    mp = ep.measure
    if mp == 0:
        raise ValueError("the pivot set must have positive measure")
    pieces: list = []
    for e in E:
        if e.measure == 0:
            continue
        pieces.extend(maximal_superlevel(e.intervals, as_fraction(C) * e.measure / mp))
    omega = MeasurableSetSpec(tuple(pieces))
    out = ExceptionalSet(omega, ep.minus(omega), pivot, float(C), mp)
    if strict and not out.ok:
        raise ValueError("exceptional set removes more than half of the pivot set; increase C")
    return out


def _floor_log2(r: Fraction) -> int:
    return (r.numerator // r.denominator).bit_length() - 1


def stratify_k(tritiles: Sequence[TriTile], omega: MeasurableSetSpec) -> dict[int, list[TriTile]]:
    """Group tri-tiles by the ``k`` with ``2^k <= 1 + dist(I, R \\ omega) / |I| < 2^(k+1)``."""
    out: dict[int, list[TriTile]] = {}
    for t in tritiles:
        lo, hi = t.I.bounds
        d = Fraction(0)
        for a, b in omega.intervals:
            if a <= lo and hi <= b:
                d = min(lo - a, b - hi)
                break
        k = _floor_log2(1 + d / t.I.length)
        out.setdefault(k, []).append(t)
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# packets and ensembles


@dataclass
class PacketBank:
    """Packets on one grid, built on first use."""

    L: float = WINDOW_L
    N: int = WINDOW_N
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, tile: Tile) -> WavePacket:
        key = (tile.I, tile.omega)
        if key not in self._cache:
            self._cache[key] = make_packet(tile, self.L, self.N)
        return self._cache[key]


def packet_pairing(p: WavePacket, q: WavePacket) -> complex:
    """``<phi_p, phi_q>`` over the overlap of the two sparse spectra."""
    common, ip, iq = np.intersect1d(p.bins, q.bins, return_indices=True)
    if len(common) == 0:
        return 0j
    return complex(p.function.L * np.sum(p.coefficients[ip] * np.conj(q.coefficients[iq])))


def lacunary_tree(
    rng: np.random.Generator,
    top_exp: int,
    top_k: int,
    kind: int,
    children: int = 3,
    band: float = 32,
    constants: OrderConstants = DESK,
    anchor: tuple[int, Fraction] | None = None,
    tries: int = 200,
) -> Tree | None:
    """A ``kind``-tree: a top of length ``2^top_exp`` and children four times shorter.

    Children sit below the top in coordinate ``kind`` and in the annulus of
    the coarser order in the other coordinates, which is exactly what rank
    one asks of tiles one scale-gap of four apart. ``anchor = (slot, xi)``
    forces the top's frequency interval in ``slot`` to contain ``xi``.
    """
    f = Fraction(2) ** (-top_exp)  # top frequency length
    co, cl = constants.c_order, constants.c_lesssim
    inner_r = Fraction(co * 4 - co, 2)  # |offset| bound for 3 omega_top inside 3 omega_child
    outer_r = Fraction(cl * 4 - cl, 2)
    B = as_fraction(band)
    t_lo, t_hi = math.ceil(-B / f), math.floor(B / f) - 1
    c_lo, c_hi = math.ceil(-B / (4 * f)), math.floor(B / (4 * f)) - 1
    for _ in range(tries):
        t = [int(rng.integers(t_lo, t_hi + 1)) for _ in range(3)]
        if anchor is not None:
            slot, xi = anchor
            t[slot - 1] = math.floor(as_fraction(xi) / f)
            if not t_lo <= t[slot - 1] <= t_hi:
                return None
        options = []
        for i in range(3):
            ok = []
            for c in range(c_lo, c_hi + 1):
                d = abs(Fraction(4 * c + 2) - (t[i] + Fraction(1, 2)))
                if (i + 1 == kind and d <= inner_r) or (i + 1 != kind and inner_r < d <= outer_r):
                    ok.append(c)
            options.append(ok)
        if any(not o for o in options):
            continue
        top = make_tritile(top_exp, top_k, t)
        slots = rng.permutation(4)[:children]
        kids = [
            make_tritile(top_exp - 2, 4 * top_k + int(s), [int(rng.choice(o)) for o in options])
            for s in sorted(slots)
        ]
        tree = Tree(top, tuple([top] + kids), kind)
        assert tree.is_valid(constants)
        return tree
    return None


def tree_ensemble(
    seed: int | np.random.Generator,
    n_trees: int,
    top_exp: int,
    kinds: Sequence[int] = (1, 2, 3),
    children: int = 3,
    window: float = WINDOW_L,
    band: float = 32,
    constants: OrderConstants = DESK,
    anchors: Sequence | None = None,
    positions: Sequence[int] | None = None,
) -> tuple[list[TriTile], list[Tree]]:
    """Trees with pairwise disjoint top intervals; the union has rank one.

    ``positions`` fixes the top indices (``I = 2^top_exp [k, k+1)``) and
    pairs them with ``anchors`` in order.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    length = Fraction(2) ** top_exp
    slots = int(Fraction(window) / length)
    if positions is None:
        if n_trees > slots:
            raise ValueError("more trees than top positions in the window")
        ks = sorted(int(k) for k in rng.permutation(slots)[:n_trees])
    else:
        ks = [int(k) for k in positions]
        if len(set(ks)) != len(ks):
            raise ValueError("top positions must be distinct")
    trees = []
    for n, k in enumerate(ks):
        kind = int(kinds[n % len(kinds)])
        anchor = anchors[n % len(anchors)] if anchors else None
        tr = lacunary_tree(rng, top_exp, k, kind, children, band, constants, anchor)
        if tr is None:
            tr = lacunary_tree(rng, top_exp, k, kind, children, band, constants, None)
        if tr is not None:
            trees.append(Tree(tr.top, tr.members, tr.kind, label=f"T{n}"))
    tiles = [p for t in trees for p in t.members]
    rep = check_rank1(tiles, constants)
    if not rep.ok:
        raise AssertionError(f"ensemble lost rank one: clause {rep.clause}")
    return tiles, trees


# ---------------------------------------------------------------------------
# forms


def _pairings(tritiles: Sequence[TriTile], slot: int, f: SampledFunction, bank: PacketBank) -> np.ndarray:
    return np.array([inner(f, bank(t[slot])) for t in tritiles], dtype=np.complex128)


def _weights(tritiles: Sequence[TriTile]) -> np.ndarray:
    return np.array([float(t.I.length) ** -0.5 for t in tritiles])


def lambda_bht_coeffs(tritiles: Sequence[TriTile], a1, a2, a3) -> complex:
    """``sum_P |I_P|^(-1/2) a1 a2 a3`` for coefficient arrays aligned with ``tritiles``."""
    if not len(tritiles):
        return 0j
    return complex(np.sum(_weights(tritiles) * np.asarray(a1) * np.asarray(a2) * np.asarray(a3)))


def lambda_bht(tritiles: Sequence[TriTile], f1, f2, f3, bank: PacketBank | None = None) -> complex:
    """Trilinear model form ``sum_P |I_P|^(-1/2) prod_j <f_j, phi_{P_j}>``."""
    bank = bank or PacketBank(f1.L, f1.N)
    if not len(tritiles):
        return 0j
    return lambda_bht_coeffs(tritiles, *(_pairings(tritiles, j, f, bank) for j, f in zip((1, 2, 3), (f1, f2, f3))))


def _inside(inner_tile: Tile, outer_tile: Tile) -> bool:
    return contains(outer_tile.omega.bounds, inner_tile.omega.bounds)


def b_p2(p2: Tile, Q: Sequence[TriTile], f2, f3, bank: PacketBank | None = None) -> SampledFunction:
    """``sum_{Q : omega_{Q_3} in omega_{P_2}} |I_Q|^(-1/2) <f2, phi_{Q_1}> <f3, phi_{Q_2}> phi_{Q_3}``."""
    bank = bank or PacketBank(f2.L, f2.N)
    spec = np.zeros(f2.N, dtype=np.complex128)
    for q in Q:
        if not _inside(q[3], p2):
            continue
        w = float(q.I.length) ** -0.5 * inner(f2, bank(q[1])) * inner(f3, bank(q[2]))
        pk = bank(q[3])
        np.add.at(spec, pk.bins % f2.N, w * pk.coefficients)
    return SampledFunction.from_spectrum(f2.L, f2.N, spec)


def lambda_biest(
    P: Sequence[TriTile],
    Q: Sequence[TriTile],
    f1,
    f2,
    f3,
    f4,
    bank: PacketBank | None = None,
    constants: OrderConstants = DESK,
    check: bool = True,
) -> complex:
    """``sum_P |I_P|^(-1/2) <f1, phi_{P_1}> <B_{P_2}(f2, f3), phi_{P_2}> <f4, phi_{P_3}>``."""
    if check:
        for name, coll in (("P", P), ("Q", Q)):
            rep = check_rank1(coll, constants)
            if not rep.ok:
                raise ValueError(f"collection {name} is not rank one (clause {rep.clause})")
    if not len(P) or not len(Q):
        return 0j
    bank = bank or PacketBank(f1.L, f1.N)
    total = 0j
    for p in P:
        b = b_p2(p[2], Q, f2, f3, bank)
        total += (
            float(p.I.length) ** -0.5
            * inner(f1, bank(p[1]))
            * inner(b, bank(p[2]))
            * inner(f4, bank(p[3]))
        )
    return complex(total)


def rightform_a3(q3: Tile, P: Sequence[TriTile], fa, fb, bank: PacketBank | None = None, pivot: int = 2) -> complex:
    """Third rearranged coefficient of one ``Q_3`` tile.

    ``pivot = 2`` pairs ``omega_{Q_3}`` with ``omega_{P_2}`` and uses
    ``<fa, phi_{P_1}> <fb, phi_{P_3}> <phi~_{Q_3}, phi_{P_2}>``, the order in
    which ``lambda_biest`` is written. ``pivot = 1`` is the relabeled variant
    ``<fa, phi_{P_2}> <fb, phi_{P_3}> <phi_{P_1}, phi~_{Q_3}>`` over
    ``omega_{Q_3}`` inside ``omega_{P_1}``.
    """
    bank = bank or PacketBank(fa.L, fa.N)
    if pivot not in (1, 2):
        raise ValueError("pivot must be 1 or 2")
    other = 1 if pivot == 2 else 2
    total = 0j
    q = bank(q3)
    for p in P:
        if not _inside(q3, p[pivot]):
            continue
        pair = packet_pairing(q, bank(p[2])) if pivot == 2 else packet_pairing(bank(p[1]), q)
        total += float(p.I.length) ** -0.5 * inner(fa, bank(p[other])) * inner(fb, bank(p[3])) * pair
    return complex(total)


def rightform(P, Q, f1, f2, f3, f4, bank: PacketBank | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients ``(a1, a2, a3)`` on ``Q`` with ``lambda_biest = sum_Q |I_Q|^(-1/2) a1 a2 a3``."""
    bank = bank or PacketBank(f1.L, f1.N)
    a1 = _pairings(Q, 1, f2, bank)
    a2 = _pairings(Q, 2, f3, bank)
    a3 = np.array([rightform_a3(q[3], P, f1, f4, bank, pivot=2) for q in Q], dtype=np.complex128)
    return a1, a2, a3


def rearranged_sum(Q: Sequence[TriTile], a1, a2, a3) -> complex:
    return lambda_bht_coeffs(Q, a1, a2, a3)


def b1_coefficients(P: Sequence[TriTile], trees: Sequence[Tree], c: dict, bank: PacketBank) -> np.ndarray:
    """``b_{P_1} = sum_T sum_{Q in T : omega_{Q_3} in omega_{P_1}} <phi_{P_1}, c_Q phi~_{Q_3}>``."""
    out = np.zeros(len(P), dtype=np.complex128)
    for n, p in enumerate(P):
        pk = bank(p[1])
        for t in trees:
            for q in t.members:
                if _inside(q[3], p[1]):
                    out[n] += np.conj(c[q]) * packet_pairing(pk, bank(q[3]))
    return out


# ---------------------------------------------------------------------------
# sub-tree normalizations


def subtrees(tree: Tree, constants: OrderConstants = DESK) -> list[tuple[TriTile, list[TriTile]]]:
    """``(sub-top, members below it in the tree's coordinate)`` for the top and every member."""
    out = []
    j = tree.kind
    for s in dict.fromkeys((tree.top,) + tuple(tree.members)):
        out.append((s, [p for p in tree.members if order_le(p[j], s[j], constants)]))
    return out


def subtree_constant(trees: Sequence[Tree], c: dict, constants: OrderConstants = DESK) -> float:
    """Smallest ``A`` with ``sum_{Q in T'} |c_Q|^2 <= A |I_{T'}|`` over all trees and sub-trees."""
    worst = 0.0
    for t in trees:
        for s, mem in subtrees(t, constants):
            worst = max(worst, sum(abs(c[q]) ** 2 for q in mem) / float(s.I.length))
    return worst


def normalize_ask(trees: Sequence[Tree], c: dict, constants: OrderConstants = DESK) -> dict:
    """Rescale so ``sum_{Q in T'} |c_Q|^2 <= |I_{T'}| / sum_T |I_T|`` holds with equality somewhere."""
    total = sum(float(t.I.length) for t in trees)
    A = subtree_constant(trees, c, constants)
    if A == 0:
        return dict(c)
    lam = 1.0 / math.sqrt(A * total)
    return {q: lam * v for q, v in c.items()}


# ---------------------------------------------------------------------------
# local averages of sets


def local_average(E: MeasurableSetSpec, I, M: int, L: float = WINDOW_L, N: int = WINDOW_N) -> float:
    """``int_E chi~_I^M / |I|`` on the periodic sampling grid."""
    x = np.arange(N) * (L / N)
    lo, hi = (float(v) for v in I.bounds)
    center, width = (lo + hi) / 2, hi - lo
    d = np.abs(x - center)
    d = np.minimum(d, L - d)
    w = cutoff_value(ApproxCutoff(0.0, width, M), d)
    return float(np.sum(w * E.mask(L, N)) * (L / N) / width)


# ---------------------------------------------------------------------------
# measured constants


def _complex_normal(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def l2_ratio(seed: int, bank: PacketBank, n_trees: int = 4, kind: int = 3) -> float:
    """``||sum_T sum_Q c_Q phi_{Q_j}||_2 / (A sum |I_T|)^(1/2)`` on a strongly disjoint tree family."""
    rng = np.random.default_rng(seed)
    _, trees = tree_ensemble(rng, n_trees, 0, kinds=(kind,))
    c = {q: v for t in trees for q, v in zip(t.members, _complex_normal(rng, len(t.members)))}
    A = subtree_constant(trees, c)
    spec = np.zeros(bank.N, dtype=np.complex128)
    for t in trees:
        for q in t.members:
            pk = bank(q[kind])
            np.add.at(spec, pk.bins % bank.N, c[q] * pk.coefficients)
    norm = SampledFunction.from_spectrum(float(bank.L), bank.N, spec).norm()
    return norm / math.sqrt(A * sum(float(t.I.length) for t in trees))


def energy_lemma_ratio(seed: int, bank: PacketBank, slot: int = 1) -> float:
    """Modified energy of ``<f, phi_{P_j}>`` over ``||f||_2`` on an eight-tile family."""
    rng = np.random.default_rng(seed)
    tiles, _ = tree_ensemble(rng, 2, 0, kinds=(slot, 1 + slot % 3))
    E = random_set(rng, Fraction(int(rng.integers(2, 33)), 8))
    f = random_x_function(rng, E, bank.L, bank.N)
    seq = CoefficientSequence(tuple(tiles), _pairings(tiles, slot, f, bank), slot, DESK)
    return modified_energy(seq).value / f.norm()


def size_lemma_ratio(seed: int, bank: PacketBank, M: int = 2, slot: int = 1) -> float:
    """Size of ``<f, phi_{P_j}>`` for ``f`` in ``X(E)`` over ``sup_P int_E chi~^M / |I_P|``."""
    rng = np.random.default_rng(seed)
    tiles, _ = tree_ensemble(rng, 4, 0, kinds=(1, 2, 3))
    E = random_set(rng, Fraction(int(rng.integers(2, 33)), 8))
    f = random_x_function(rng, E, bank.L, bank.N)
    seq = CoefficientSequence(tuple(tiles), _pairings(tiles, slot, f, bank), slot, DESK)
    denom = max(local_average(E, t.I, M, bank.L, bank.N) for t in tiles)
    return size(seq).value / denom


def split_cor_ratio(seed: int, bank: PacketBank) -> float:
    """Modified energy of ``b^(1)`` built from normalized strongly 3-disjoint trees (eight P tiles)."""
    rng = np.random.default_rng(seed)
    P, Q, trees = biest_collections(rng, n_q=4, n_p=2, kinds_q=(3,), anchor_slot=1)
    c = normalize_ask(trees, {q: v for q, v in zip(Q, _complex_normal(rng, len(Q)))})
    b = b1_coefficients(P, trees, c, bank)
    return modified_energy(CoefficientSequence(tuple(P), b, 1, DESK)).value


def _bht_setup(seed: int, bank: PacketBank):
    rng = np.random.default_rng(seed)
    E3 = random_set(rng, Fraction(2) ** int(rng.integers(-3, 3)), piece_exp=-4)
    E4 = random_set(rng, Fraction(2) ** int(rng.integers(-3, 3)), piece_exp=-4)
    w = _slot_weights((E3, E4), MeasurableSetSpec(()), 0)
    P, Q, _ = biest_collections(rng, w, None, n_q=6, n_p=10, anchor_slot=1)
    f3 = random_x_function(rng, E3, bank.L, bank.N)
    f4 = random_x_function(rng, E4, bank.L, bank.N)
    a3 = np.array([rightform_a3(q[3], P, f3, f4, bank, pivot=1) for q in Q], dtype=np.complex128)
    return Q, P, E3, E4, a3


def bht_size_ratio(seed: int, bank: PacketBank, theta: float = 0.5, M: int = 4) -> float:
    """``size_3(a^(3))`` over ``sup_Q avg_3^(1-theta) avg_4^theta``."""
    Q, _, E3, E4, a3 = _bht_setup(seed, bank)
    seq = CoefficientSequence(tuple(Q), a3, 3, DESK)
    denom = max(
        local_average(E3, q.I, M, bank.L, bank.N) ** (1 - theta) * local_average(E4, q.I, M, bank.L, bank.N) ** theta
        for q in Q
    )
    return size(seq).value / denom


def bht_energy_ratio(seed: int, bank: PacketBank, theta: float = 0.5) -> float:
    """Modified energy of ``a^(3)`` over ``|E4|^((1-theta)/2) |E3|^(theta/2)`` (top eight tiles)."""
    Q, _, E3, E4, a3 = _bht_setup(seed, bank)
    order = np.argsort(-np.abs(a3), kind="stable")[:8]
    sub = [Q[i] for i in sorted(order)]
    seq = CoefficientSequence(tuple(sub), a3[sorted(order)], 3, DESK)
    denom = float(E4.measure) ** ((1 - theta) / 2) * float(E3.measure) ** (theta / 2)
    return modified_energy(seq).value / denom


# ---------------------------------------------------------------------------
# restricted-type experiments


@dataclass
class Instance:
    seed: int
    measures: tuple
    lam: complex
    weight: float
    strata: dict
    omega_measure: float
    major_ok: bool
    bound: float | None = None  # supremum of |lam| over the function classes, when computed

    @property
    def ratio(self) -> float:
        return abs(self.lam) / self.weight

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "E_sizes": [float(m) for m in self.measures],
            "lambda_abs": abs(self.lam),
            "ratio": self.ratio,
            "strata": {str(k): v for k, v in self.strata.items()},
            "omega_measure": self.omega_measure,
            "major_ok": self.major_ok,
            "sup_bound": self.bound,
        }


def _set_sizes(rng, count: int, pivot: int) -> list[Fraction]:
    """Measures for the experiment sets.

    Non-pivot sets span three dyadic orders (1/16 to 1/4). The pivot set
    has measure 4 or 8: with ``C = 8`` the superlevel threshold
    ``C |E_j| / |E_pivot|`` is below one only when the pivot set is more
    than eight times larger, otherwise the exceptional set is empty.
    """
    sizes = [Fraction(2) ** int(rng.integers(-4, -1)) for _ in range(count)]
    sizes[pivot - 1] = Fraction(2) ** int(rng.integers(2, 4))
    return sizes


def _experiment_sets(rng, count: int, pivot: int, C: float):
    sizes = _set_sizes(rng, count, pivot)
    E = [random_set(rng, s, WINDOW_L, piece_exp=-4) for s in sizes]
    return sizes, E, exceptional_set(E, pivot, C)


def _slot_weights(sets: Sequence[MeasurableSetSpec], omega: MeasurableSetSpec, exp: int) -> np.ndarray:
    """Sampling weights of the dyadic slots of length ``2^exp``: favour the exceptional set and the sets."""
    length = Fraction(2) ** exp
    n = int(Fraction(WINDOW_L) / length)
    w = np.ones(n)
    for k in range(n):
        slot = MeasurableSetSpec(((k * length, (k + 1) * length),))
        w[k] += 8 * float(measure(_meet(slot, omega)) / length)
        w[k] += sum(float(measure(_meet(slot, e)) / length) for e in sets)
    return w / w.sum()


def _meet(a: MeasurableSetSpec, b: MeasurableSetSpec) -> tuple:
    return tuple(
        (max(x, u), min(y, v)) for x, y in a.intervals for u, v in b.intervals if max(x, u) < min(y, v)
    )


def biest_collections(
    rng,
    weights_q=None,
    weights_p=None,
    n_q: int = 8,
    n_p: int = 12,
    kinds_q: Sequence[int] = (1, 2, 3),
    anchor_slot: int = 2,
):
    """Q trees on unit intervals and P trees of length 1/4 nested inside them.

    Each P top has its ``anchor_slot`` frequency interval anchored at the
    third frequency of a member of the Q tree above it, so that the
    inclusion of ``omega_{Q_3}`` in ``omega_{P_anchor}`` occurs.
    """
    nq = int(WINDOW_L)
    qpos = sorted(int(k) for k in rng.choice(nq, size=n_q, replace=False, p=weights_q))
    Q, qtrees = tree_ensemble(rng, n_q, 0, kinds=kinds_q, positions=qpos)
    inside = np.array([4 * k + r for k in qpos for r in range(4)])
    wp = None
    if weights_p is not None:
        wp = weights_p[inside] / weights_p[inside].sum()
    slots = sorted(int(k) for k in rng.choice(inside, size=min(n_p, len(inside)), replace=False, p=wp))
    by_pos = {t.top.I.bounds[0]: t for t in qtrees}
    anchors = []
    for k in slots:
        host = by_pos.get(Fraction(k // 4))
        q = host.members[int(rng.integers(len(host.members)))] if host else Q[int(rng.integers(len(Q)))]
        anchors.append((anchor_slot, q[3].omega.center))
    P, _ = tree_ensemble(rng, len(slots), -2, kinds=(1, 2, 3), anchors=anchors, positions=slots)
    return P, Q, qtrees


def biest_instance(seed: int, alpha: AdmissibleTuple, C: float = 8, bank: PacketBank | None = None) -> Instance:
    """One draw of sets, functions and collections for the four-linear model form.

    The pivot is the negative entry of ``alpha``; ``f_pivot`` lives on the
    major subset left after removing the exceptional set. Strata group the
    P tri-tiles by depth inside the exceptional set.
    """
    bank = bank or PacketBank()
    pivot = alpha.bad_index or 4
    rng = np.random.default_rng(seed)
    sizes, E, ex = _experiment_sets(rng, 4, pivot, C)
    used = list(E)
    used[pivot - 1] = ex.major
    f = [random_x_function(rng, e, bank.L, bank.N) for e in used]
    P, Q, _ = biest_collections(rng, _slot_weights(E, ex.omega, 0), _slot_weights(E, ex.omega, -2))
    a1, a2, a3 = rightform(P, Q, *f, bank=bank)
    strata = {}
    for k, sub in stratify_k(P, ex.omega).items():
        a3k = np.array([rightform_a3(q[3], sub, f[0], f[3], bank, pivot=2) for q in Q], dtype=np.complex128)
        strata[k] = abs(rearranged_sum(Q, a1, a2, a3k))
    lam = rearranged_sum(Q, a1, a2, a3)
    inst = Instance(seed, tuple(sizes), lam, alpha.weight(sizes), strata, float(ex.omega.measure), ex.ok)
    inst.bound = biest_sup_bound(P, Q, used, bank)
    return inst


def _mass_on(e: MeasurableSetSpec, pk: WavePacket) -> float:
    """``int_E |phi|``: the largest ``|<f, phi>|`` over ``f`` in ``X(E)``."""
    f = pk.function
    return float(np.sum(np.abs(f.values) * e.mask(f.L, f.N)) * f.L / f.N)


def biest_sup_bound(P, Q, sets: Sequence[MeasurableSetSpec], bank: PacketBank) -> float:
    """Upper bound for ``|lambda_biest|`` over all ``f_j`` in ``X(E_j)`` for fixed collections."""
    total = 0.0
    for q in Q:
        inner_sum = 0.0
        for p in P:
            if _inside(q[3], p[2]):
                pair = abs(packet_pairing(bank(q[3]), bank(p[2])))
                if pair:
                    inner_sum += (
                        float(p.I.length) ** -0.5 * _mass_on(sets[0], bank(p[1])) * _mass_on(sets[3], bank(p[3])) * pair
                    )
        if inner_sum:
            total += (
                float(q.I.length) ** -0.5 * _mass_on(sets[1], bank(q[1])) * _mass_on(sets[2], bank(q[2])) * inner_sum
            )
    return total


def bht_instance(seed: int, alpha: Sequence[float], C: float = 8, bank: PacketBank | None = None) -> Instance:
    """One draw for the trilinear model form with the third set as pivot."""
    bank = bank or PacketBank()
    rng = np.random.default_rng(seed)
    sizes, E, ex = _experiment_sets(rng, 3, 3, C)
    used = [E[0], E[1], ex.major]
    f = [random_x_function(rng, e, bank.L, bank.N) for e in used]
    w = _slot_weights(E, ex.omega, -1)
    pos = sorted(int(k) for k in rng.choice(len(w), size=12, replace=False, p=w))
    P, _ = tree_ensemble(rng, len(pos), -1, kinds=(1, 2, 3), positions=pos)
    coeffs = [_pairings(P, j, fj, bank) for j, fj in zip((1, 2, 3), f)]
    strata = {}
    index = {t: n for n, t in enumerate(P)}
    for k, sub in stratify_k(P, ex.omega).items():
        ids = [index[t] for t in sub]
        strata[k] = abs(lambda_bht_coeffs(sub, *(c[ids] for c in coeffs)))
    lam = lambda_bht_coeffs(P, *coeffs)
    weight = float(np.prod([float(s) ** a for s, a in zip(sizes, alpha)]))
    inst = Instance(seed, tuple(sizes), lam, weight, strata, float(ex.omega.measure), ex.ok)
    inst.bound = float(
        sum(float(p.I.length) ** -0.5 * np.prod([_mass_on(e, bank(p[j])) for j, e in zip((1, 2, 3), used)]) for p in P)
    )
    return inst


def restricted_type_experiment(
    alpha: Sequence[float],
    vertex: str | None,
    seeds: Sequence[int],
    kind: str = "biest",
    C: float = 8,
) -> dict:
    """Ratios ``|Lambda| / |E|^alpha`` over seeds with per-stratum contributions."""
    bank = PacketBank()
    if kind == "biest":
        tup = AdmissibleTuple(tuple(alpha))
        exps = exponents_for_vertex(tup, vertex).as_tuple() if vertex else None
        inst = [biest_instance(s, tup, C, bank) for s in seeds]
    elif kind == "bht":
        exps = exponents_bht(alpha).as_tuple()
        inst = [bht_instance(s, alpha, C, bank) for s in seeds]
    else:
        raise ValueError("kind must be 'biest' or 'bht'")
    strata: dict[int, float] = {}
    for i in inst:
        for k, v in i.strata.items():
            strata[k] = strata.get(k, 0.0) + v / i.weight
    return {
        "kind": kind,
        "alpha": [float(a) for a in alpha],
        "vertex": vertex,
        "exponents": exps,
        "seeds": list(seeds),
        "per_instance": [i.to_json() for i in inst],
        "max_ratio": max((i.ratio for i in inst), default=0.0),
        "strata": {str(k): v for k, v in sorted(strata.items())},
        "constants": {"C": C, "L": bank.L, "N": bank.N},
    }


def strata_non_increasing(strata: dict, start: int = 2, slack: float = 0.05) -> bool:
    """Aggregated stratum contributions do not grow beyond ``start`` (relative slack)."""
    ks = sorted(int(k) for k in strata)
    vals = {int(k): v for k, v in strata.items()}
    for a, b in zip(ks, ks[1:]):
        if a >= start and vals[b] > (1 + slack) * vals[a] + 1e-15:
            return False
    return True
