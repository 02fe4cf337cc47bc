"""Whitney covers of the cone symbols, their Fourier-series splitting and the symbol m'.

A cone symbol such as ``1_{2 xi1 < xi2}`` on the plane ``xi1 + xi2 + xi3 = 0``
is written as a sum of bumps ``phi_Q`` over shifted dyadic cubes whose
distance to the singular line is comparable to their diameter. Each bump
is the product of a log-scale partition in the distance and three 1-D
partitions over the three shifted meshes, so the bumps of all 27 shift
vectors sum to one away from the line.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .grid import SHIFTS, ShiftedCube, _sign, as_fraction, intersects
from .packets import eta

# singular lines inside the plane: direction vectors and the positive side
SINGULAR = {
    "2x1=x2": ((1, 2, -3), (-2, 1, 0)),
    "x1=x2": ((1, 1, -2), (-1, 1, 0)),
}


@dataclass(frozen=True)
class WhitneyConstants:
    """Sandwich constants and the two dilations of cube rank 1."""

    c_lo: float = 4
    c_hi: float = 16
    c_lesssim: int = 8
    c_scale: int = 16

    def __post_init__(self):
        if not 0 < self.c_lo < self.c_hi:
            raise ValueError("need 0 < c_lo < c_hi")
        if self.c_hi <= 2 * (self.c_lo + 1):
            raise ValueError("need c_hi > 2 (c_lo + 1) for the log-scale partition")

    @property
    def log_window(self) -> tuple[float, float]:
        """Range of ``log2(dist / side)`` on which a cube's bump may live."""
        return math.log2((self.c_lo + 1) * math.sqrt(3)), math.log2(self.c_hi * math.sqrt(3))

    def as_dict(self) -> dict:
        return {"c_lo": self.c_lo, "c_hi": self.c_hi, "c_lesssim": self.c_lesssim, "c_scale": self.c_scale}


DESK_WHITNEY = WhitneyConstants()
NOMINAL_WHITNEY = WhitneyConstants(10**3, 10**5, 10**7, 10**9)


# ---------------------------------------------------------------------------
# exact geometry


def line_dist2_box(box: Sequence[tuple], v: Sequence[int]) -> Fraction:
    """Exact squared distance from an axis-parallel box to the line ``R v``.

    ``g(t) = sum_i dist(t v_i, [lo_i, hi_i])^2`` is convex and piecewise
    quadratic with breakpoints at ``lo_i / v_i`` and ``hi_i / v_i``; its
    minimum over each piece has a closed form.
    """
    box = [(as_fraction(lo), as_fraction(hi)) for lo, hi in box]
    v = [Fraction(x) for x in v]
    cuts = sorted({b / vi for (lo, hi), vi in zip(box, v) if vi for b in (lo, hi)})

    def g(t: Fraction) -> Fraction:
        s = Fraction(0)
        for (lo, hi), vi in zip(box, v):
            x = t * vi
            if x < lo:
                s += (lo - x) ** 2
            elif x > hi:
                s += (x - hi) ** 2
        return s

    pts = list(cuts)
    edges = [None] + cuts + [None]
    for a, b in zip(edges, edges[1:]):
        # representative point of the piece fixes the active set
        if a is None and b is None:
            mid = Fraction(0)
        elif a is None:
            mid = b - 1
        elif b is None:
            mid = a + 1
        else:
            mid = (a + b) / 2
        num, den = Fraction(0), Fraction(0)
        for (lo, hi), vi in zip(box, v):
            x = mid * vi
            if x < lo:
                num, den = num + vi * lo, den + vi * vi
            elif x > hi:
                num, den = num + vi * hi, den + vi * vi
        if den:
            t = num / den
            if (a is None or t >= a) and (b is None or t <= b):
                pts.append(t)
    return min(g(t) for t in pts) if pts else Fraction(0)


def line_dist(xi: np.ndarray, v: Sequence[int]) -> np.ndarray:
    """Euclidean distance of points (last axis of length 3) to the line ``R v``."""
    v = np.asarray(v, dtype=float)
    xi = np.asarray(xi, dtype=float)
    proj = xi @ v / float(v @ v)
    return np.linalg.norm(xi - proj[..., None] * v, axis=-1)


def cube_meets_plane(cube: ShiftedCube) -> bool:
    lo = sum(a.lo for a in cube.axes)
    hi = sum(a.hi for a in cube.axes)
    return lo < 0 < hi


def sandwich_ok(cube: ShiftedCube, v, constants: WhitneyConstants) -> bool:
    """``c_lo diam(Q) <= dist(Q, line) <= c_hi diam(Q)`` in exact arithmetic."""
    d2 = line_dist2_box([a.bounds for a in cube.axes], v)
    diam2 = 3 * cube.side**2
    lo, hi = as_fraction(constants.c_lo), as_fraction(constants.c_hi)
    return lo * lo * diam2 <= d2 <= hi * hi * diam2


# ---------------------------------------------------------------------------
# bumps


_CDF_GRID = np.linspace(-1.0, 1.0, 40001)


def _eta_cdf_table():
    dens = eta(_CDF_GRID)
    cum = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2)])
    return cum / cum[-1]


_CDF = _eta_cdf_table()


def eta_cdf(x):
    """Cumulative distribution of the normalized bump ``eta`` on ``[-1, 1]``."""
    return np.interp(np.asarray(x, dtype=float), _CDF_GRID, _CDF, left=0.0, right=1.0)


def mollified_window(x, lo: float, hi: float, width: float):
    """Indicator of ``[lo, hi)`` convolved with ``eta`` rescaled to half-width ``width``."""
    x = np.asarray(x, dtype=float)
    return eta_cdf((x - lo) / width) - eta_cdf((x - hi) / width)


AXIS_WIDTH = 0.195  # support (0.138, 0.862); chosen so truncation error decreases in K


def axis_partition(u):
    """Smoothed indicator of the middle third; its translates by ``1/3`` sum to one."""
    return mollified_window(u, 1 / 3, 2 / 3, AXIS_WIDTH)


def scale_partition(x, constants: WhitneyConstants):
    """Partition of unity in ``x = log2(dist) - j`` supported in the constants' log window."""
    a, b = constants.log_window
    mid = (a + b) / 2
    width = 0.49 * (b - a - 1)
    return mollified_window(x, mid - 0.5, mid + 0.5, width)


def _smooth_step(x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    f = np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
    g = np.where(x < 1, np.exp(-1.0 / np.maximum(1 - x, 1e-300)), 0.0)
    return f / (f + g)


def taper(u):
    """Equal to one on ``[0.1, 0.9]`` and supported in ``(0.05, 0.95)``."""
    u = np.asarray(u, dtype=float)
    return _smooth_step((u - 0.05) / 0.05) * _smooth_step((0.95 - u) / 0.05)


# ---------------------------------------------------------------------------
# covers


def _cube_arrays(cube: ShiftedCube):
    return np.array([float(a.lo) for a in cube.axes]), float(cube.side)


def cube_bump(cube: ShiftedCube, xi: np.ndarray, v, constants: WhitneyConstants) -> np.ndarray:
    """``phi_Q`` at points ``xi`` (last axis of length 3)."""
    lo, s = _cube_arrays(cube)
    u = (np.asarray(xi, dtype=float) - lo) / s
    inside = np.all((u > 0) & (u < 1), axis=-1)
    out = np.zeros(u.shape[:-1])
    if not inside.any():
        return out
    ui = u[inside]
    d = line_dist(xi[inside], v)
    with np.errstate(divide="ignore"):
        x = np.log2(d) - cube.j
    val = scale_partition(x, constants)
    for i in range(3):
        val = val * axis_partition(ui[:, i])
    out[inside] = val
    return out


def containing_cube(xi, j: int, sigma) -> ShiftedCube:
    s = Fraction(2) ** j
    ks = tuple(math.floor(as_fraction(x) / s - _sign(j) * sg) for x, sg in zip(xi, sigma))
    return ShiftedCube(j, ks, sigma)


@dataclass
class WhitneyCover:
    sigma: tuple
    cubes: list[ShiftedCube]
    constants: WhitneyConstants
    singular: str = "2x1=x2"

    @property
    def direction(self):
        return SINGULAR[self.singular][0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "sigma": [str(s) for s in self.sigma],
                "singular": self.singular,
                "cubes": [{"j": c.j, "k1": c.ks[0], "k2": c.ks[1], "k3": c.ks[2]} for c in self.cubes],
                "constants": self.constants.as_dict(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "WhitneyCover":
        rec = json.loads(text)
        sig = tuple(Fraction(s) for s in rec["sigma"])
        cubes = [ShiftedCube(c["j"], (c["k1"], c["k2"], c["k3"]), sig) for c in rec["cubes"]]
        return cls(sig, cubes, WhitneyConstants(**rec["constants"]), rec.get("singular", "2x1=x2"))

    def parts(self) -> list[list[ShiftedCube]]:
        return refine_rank1(self.cubes, self.constants)


def _scale_range(box, v, constants) -> range:
    corners = [np.array(c, dtype=float) for c in itertools.product(*[(float(lo), float(hi)) for lo, hi in box])]
    dmax = max(float(line_dist(c, v)) for c in corners)
    dmin = math.sqrt(float(line_dist2_box(box, v)))
    j_hi = math.floor(math.log2(max(dmax, 1e-300) / (constants.c_lo * math.sqrt(3)))) + 1
    base = max(dmin, 1e-12)
    j_lo = math.floor(math.log2(base / (constants.c_hi * math.sqrt(3)) / 2)) - 1
    return range(j_lo, j_hi + 1)


def whitney_cover(
    sigma,
    box: Sequence[tuple],
    constants: WhitneyConstants = DESK_WHITNEY,
    singular: str = "2x1=x2",
    min_scale: int = -30,
) -> WhitneyCover:
    """Mesh cubes that meet ``box`` and the plane and satisfy the sandwich exactly."""
    sigma = tuple(as_fraction(s) for s in sigma)
    box = [(as_fraction(lo), as_fraction(hi)) for lo, hi in box]
    v = SINGULAR[singular][0]
    cubes = []
    for j in _scale_range(box, v, constants):
        if j < min_scale:
            continue
        s = Fraction(2) ** j
        kr = [
            range(math.floor(lo / s - _sign(j) * sg) , math.ceil(hi / s - _sign(j) * sg))
            for (lo, hi), sg in zip(box, sigma)
        ]
        for k1 in kr[0]:
            for k2 in kr[1]:
                a1 = s * (k1 + _sign(j) * sigma[0])
                a2 = s * (k2 + _sign(j) * sigma[1])
                # the plane crosses the open cube only for these k3
                t_lo, t_hi = -(a1 + a2 + 2 * s), -(a1 + a2)
                k3_lo = math.floor(t_lo / s - _sign(j) * sigma[2]) - 1
                k3_hi = math.ceil(t_hi / s - _sign(j) * sigma[2]) + 1
                for k3 in range(max(k3_lo, kr[2].start), min(k3_hi, kr[2].stop - 1) + 1):
                    cube = ShiftedCube(j, (k1, k2, k3), sigma)
                    if not cube_meets_plane(cube):
                        continue
                    if not all(intersects(a.bounds, b) for a, b in zip(cube.axes, box)):
                        continue
                    if sandwich_ok(cube, v, constants):
                        cubes.append(cube)
    return WhitneyCover(sigma, cubes, constants, singular)


def brute_force_cover(sigma, box, scales: Sequence[int], constants=DESK_WHITNEY, singular="2x1=x2"):
    """Every mesh cube of the given scales filtered by box, plane and sandwich (test oracle)."""
    sigma = tuple(as_fraction(s) for s in sigma)
    box = [(as_fraction(lo), as_fraction(hi)) for lo, hi in box]
    v = SINGULAR[singular][0]
    out = []
    for j in scales:
        s = Fraction(2) ** j
        ranges = [range(math.floor(lo / s) - 2, math.ceil(hi / s) + 2) for lo, hi in box]
        for ks in itertools.product(*ranges):
            c = ShiftedCube(j, ks, sigma)
            if (
                cube_meets_plane(c)
                and all(intersects(a.bounds, b) for a, b in zip(c.axes, box))
                and sandwich_ok(c, v, constants)
            ):
                out.append(c)
    return out


# ---------------------------------------------------------------------------
# cube rank 1


def _cube_table(cubes: Sequence[ShiftedCube]):
    den = 1
    for c in cubes:
        for a in c.axes:
            for x in a.bounds:
                den = den * x.denominator // math.gcd(den, x.denominator)
    lo = np.array([[int(a.lo * den) for a in c.axes] for c in cubes], dtype=object)
    hi = np.array([[int(a.hi * den) for a in c.axes] for c in cubes], dtype=object)
    return lo, hi


def cube_rank1_conflicts(cubes: Sequence[ShiftedCube], constants: WhitneyConstants = DESK_WHITNEY) -> np.ndarray:
    """Symmetric matrix of pairs violating one of the four cube rank-one clauses."""
    n = len(cubes)
    if n == 0:
        return np.zeros((0, 0), dtype=bool)
    lo, hi = _cube_table(cubes)
    lo = lo.astype(float) if np.max(np.abs(hi.astype(float))) < 2**50 / max(constants.c_lesssim, 3) else lo
    hi = hi.astype(float) if lo.dtype == float else hi
    side = hi[:, 0] - lo[:, 0]
    off = ~np.eye(n, dtype=bool)

    def dil(c):
        s, d = lo + hi, hi - lo
        return s - c * d, s + c * d  # doubled coordinates

    lo3, hi3 = dil(3)
    loC, hiC = dil(constants.c_lesssim)
    meet_all = np.ones((n, n), dtype=bool)
    for i in range(3):
        meet_all &= (lo[:, None, i] < hi[None, :, i]) & (lo[None, :, i] < hi[:, None, i])
    bad = meet_all & off
    for i in range(3):
        bad |= (lo[:, None, i] == lo[None, :, i]) & (hi[:, None, i] == hi[None, :, i]) & off
    C_in = np.ones((n, n), dtype=bool)  # C_in[p, q]: C Q_p inside C Q_q in every axis
    for i in range(3):
        C_in &= (loC[None, :, i] <= loC[:, None, i]) & (hiC[:, None, i] <= hiC[None, :, i])
    small = side[:, None] < constants.c_scale * side[None, :]
    for j in range(3):
        inside = (lo3[None, :, j] <= lo3[:, None, j]) & (hi3[:, None, j] <= hi3[None, :, j]) & off
        bad |= inside & ~C_in
        for i in range(3):
            if i == j:
                continue
            meet3 = (lo3[:, None, i] < hi3[None, :, i]) & (lo3[None, :, i] < hi3[:, None, i])
            bad |= inside & small & meet3
    return bad | bad.T


def check_cube_rank1(cubes: Sequence[ShiftedCube], constants: WhitneyConstants = DESK_WHITNEY):
    bad = cube_rank1_conflicts(cubes, constants)
    if bad.any():
        p, q = np.argwhere(bad)[0]
        return False, (cubes[p], cubes[q])
    return True, None


def refine_rank1(cubes: Sequence[ShiftedCube], constants: WhitneyConstants = DESK_WHITNEY) -> list[list[ShiftedCube]]:
    """Greedy coloring of the rank-one conflict graph; each part has rank 1."""
    cubes = list(cubes)
    bad = cube_rank1_conflicts(cubes, constants)
    color = -np.ones(len(cubes), dtype=int)
    order = sorted(range(len(cubes)), key=lambda p: (-cubes[p].j, cubes[p].ks))
    for p in order:
        used = set(color[bad[p] & (color >= 0)].tolist())
        c = 0
        while c in used:
            c += 1
        color[p] = c
    return [[cubes[p] for p in np.flatnonzero(color == c)] for c in range(color.max() + 1)] if cubes else []


# ---------------------------------------------------------------------------
# Fourier splitting


@dataclass
class SymbolSeries:
    """Per-cube Fourier coefficients of ``phi_Q`` on the cube's period, truncated at ``|k| <= K``."""

    constants: WhitneyConstants
    singular: str = "2x1=x2"
    K: int = 5
    grid: int = 32
    _coeffs: dict = field(default_factory=dict, repr=False)

    @property
    def direction(self):
        return SINGULAR[self.singular][0]

    def coefficients(self, cube: ShiftedCube) -> np.ndarray:
        """Full FFT coefficients ``c[k]`` (numpy FFT order) of ``phi_Q(lo + side u)``."""
        if cube not in self._coeffs:
            M = self.grid
            u = np.arange(M) / M
            a = axis_partition(u)
            lo, s = _cube_arrays(cube)
            U = np.stack(np.meshgrid(u, u, u, indexing="ij"), axis=-1)
            d = line_dist(lo + s * U, self.direction)
            with np.errstate(divide="ignore"):
                vals = scale_partition(np.log2(d) - cube.j, self.constants)
            vals *= a[:, None, None] * a[None, :, None] * a[None, None, :]
            self._coeffs[cube] = np.fft.fftn(vals) / M**3
        return self._coeffs[cube]

    def envelope(self, cubes: Sequence[ShiftedCube]) -> np.ndarray:
        """``max_Q |c_{Q,k}|`` as a function of ``|k|_inf`` for ``k = 0 .. grid/2 - 1``."""
        M = self.grid
        kk = np.fft.fftfreq(M, 1.0 / M).astype(int)
        norm = np.maximum.reduce(np.meshgrid(abs(kk), abs(kk), abs(kk), indexing="ij"))
        out = np.zeros(M // 2)
        for c in cubes:
            a = np.abs(self.coefficients(c))
            for r in range(M // 2):
                out[r] = max(out[r], float(a[norm == r].max()))
        return out

    def cube_value(self, cube: ShiftedCube, xi: np.ndarray, K: int | None = None) -> float:
        """Truncated series ``prod taper(u_i) sum_{|k| <= K} c_k e^{2 pi i k.u}`` at one point."""
        K = self.K if K is None else K
        lo, s = _cube_arrays(cube)
        u = (np.asarray(xi, dtype=float) - lo) / s
        tp = float(np.prod(taper(u)))
        if tp == 0:
            return 0.0
        c = self.coefficients(cube)
        ks = np.arange(-K, K + 1)
        e = [np.exp(2j * np.pi * ks * u[i]) for i in range(3)]
        sub = c[np.ix_(ks % self.grid, ks % self.grid, ks % self.grid)]
        val = np.einsum("abc,a,b,c->", sub, e[0], e[1], e[2])
        return tp * float(val.real)


def fourier_split(cover: WhitneyCover, K: int = 5, grid: int = 32) -> SymbolSeries:
    if K < 1:
        raise ValueError("K must be at least 1")
    return SymbolSeries(cover.constants, cover.singular, K, grid)


def positive_side(xi, singular: str) -> bool:
    n = SINGULAR[singular][1]
    return float(np.dot(n, xi)) > 0


def _candidate_cubes(xi, constants: WhitneyConstants, v):
    """Cubes of every shift vector that contain ``xi`` and may carry a nonzero bump."""
    d = float(line_dist(np.asarray(xi, dtype=float), v))
    a, b = constants.log_window
    j_lo = math.floor(math.log2(d) - b) - 1
    j_hi = math.ceil(math.log2(d) - a) + 1
    xi_f = [Fraction(float(x)) for x in xi]
    for sigma in itertools.product(SHIFTS, repeat=3):
        for j in range(j_lo, j_hi + 1):
            yield containing_cube(xi_f, j, sigma)


def reconstruct_chi(
    series: SymbolSeries,
    xi,
    delta: float = 0.25,
    K: int | None = None,
    exact: bool = False,
) -> float:
    """Sum of the cube bumps of one side of the singular line at a point of the plane.

    With ``exact`` the bumps are evaluated directly; otherwise through the
    truncated Fourier series. Points closer than ``delta`` to the line are
    rejected.
    """
    xi = np.asarray(xi, dtype=float)
    v = series.direction
    if float(line_dist(xi, v)) < delta:
        raise ValueError("point lies inside the excluded neighbourhood of the singular line")
    if not positive_side(xi, series.singular):
        # cubes never straddle the line, so only same-side cubes contribute
        return 0.0 if exact else _series_sum(series, xi, K)
    return _exact_sum(series, xi) if exact else _series_sum(series, xi, K)


def _series_sum(series: SymbolSeries, xi, K) -> float:
    total = 0.0
    for cube in _candidate_cubes(xi, series.constants, series.direction):
        if not positive_side(np.array([float(a.center) for a in cube.axes]), series.singular):
            continue
        if not cube_meets_plane(cube) or not sandwich_ok(cube, series.direction, series.constants):
            continue
        total += series.cube_value(cube, xi, K)
    return total


def _exact_sum(series: SymbolSeries, xi) -> float:
    total = 0.0
    for cube in _candidate_cubes(xi, series.constants, series.direction):
        if not positive_side(np.array([float(a.center) for a in cube.axes]), series.singular):
            continue
        total += float(cube_bump(cube, xi[None, :], series.direction, series.constants)[0])
    return total


def plane_point(a: float, b: float) -> np.ndarray:
    """Point of the plane ``sum xi = 0`` with ``xi1 = a``, ``xi2 = b``."""
    return np.array([a, b, -a - b])


def probe_grid(half_width: float = 1.0, steps: int = 15, delta: float = 0.25, singular: str = "2x1=x2"):
    """Plane points on a square grid in ``(xi1, xi2)`` at distance at least ``delta`` from the line."""
    v = SINGULAR[singular][0]
    pts = []
    for a in np.linspace(-half_width, half_width, steps):
        for b in np.linspace(-half_width, half_width, steps):
            p = plane_point(a, b)
            if float(line_dist(p, v)) >= delta:
                pts.append(p)
    return pts


def probe(series: SymbolSeries, points, K: int | None = None) -> list[tuple]:
    """``(xi, value, error)`` rows against the exact indicator."""
    rows = []
    for p in points:
        val = reconstruct_chi(series, p, delta=0.0, K=K)
        target = 1.0 if positive_side(p, series.singular) else 0.0
        rows.append((tuple(float(x) for x in p), val, abs(val - target)))
    return rows


def probe_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["xi1", "xi2", "xi3", "value", "error"])
    for xi, val, err in rows:
        w.writerow([*xi, val, err])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# the symbol m'


@dataclass
class MPrime:
    """``m'`` on the hyperplane ``xi1 + xi2 + xi3 + xi4 = 0`` from two cube families.

    The first family resolves ``1_{2 a1 < a2}`` at ``a = (xi1, xi2 + xi3, xi4)``
    and the second ``1_{b1 < b2}`` at ``b = (xi2, xi3, xi1 + xi4)``; a pair
    ``(Q, Q')`` contributes only if ``-Q'_3`` lies inside ``Q_2``.
    """

    constants: WhitneyConstants
    series_a: SymbolSeries | None = None
    series_b: SymbolSeries | None = None
    K: int | None = None
    stats: dict = field(default_factory=lambda: {"pairs": 0, "blocked": 0})

    def _bumps(self, point, singular, series):
        v = SINGULAR[singular][0]
        out = []
        if float(line_dist(point, v)) == 0:
            return out
        for cube in _candidate_cubes(point, self.constants, v):
            if not positive_side(np.array([float(a.center) for a in cube.axes]), singular):
                continue
            if series is None:
                val = float(cube_bump(cube, point[None, :], v, self.constants)[0])
            else:
                if not cube_meets_plane(cube) or not sandwich_ok(cube, v, self.constants):
                    continue
                val = series.cube_value(cube, point, self.K)
            if val != 0:
                out.append((cube, val))
        return out

    def __call__(self, xi1: float, xi2: float, xi3: float) -> float:
        xi4 = -(xi1 + xi2 + xi3)
        a = np.array([xi1, xi2 + xi3, xi4], dtype=float)
        b = np.array([xi2, xi3, xi1 + xi4], dtype=float)
        qa = self._bumps(a, "2x1=x2", self.series_a)
        qb = self._bumps(b, "x1=x2", self.series_b)
        total = 0.0
        for q, va in qa:
            q2 = q.axes[1].bounds
            for qp, vb in qb:
                lo, hi = qp.axes[2].bounds
                self.stats["pairs"] += 1
                if q2[0] <= -hi and -lo <= q2[1]:
                    total += va * vb
                else:
                    self.stats["blocked"] += 1
        return total

    def unconstrained(self, xi1: float, xi2: float, xi3: float) -> float:
        xi4 = -(xi1 + xi2 + xi3)
        a = np.array([xi1, xi2 + xi3, xi4], dtype=float)
        b = np.array([xi2, xi3, xi1 + xi4], dtype=float)
        sa = sum(v for _, v in self._bumps(a, "2x1=x2", self.series_a))
        sb = sum(v for _, v in self._bumps(b, "x1=x2", self.series_b))
        return sa * sb


def build_mprime(constants: WhitneyConstants = DESK_WHITNEY, series_a=None, series_b=None, K=None) -> MPrime:
    return MPrime(constants, series_a, series_b, K)


def mirror_mprime(m: MPrime) -> Callable[[float, float, float], float]:
    """``m''`` by exchanging the first and third frequency of the trilinear symbol."""
    return lambda xi1, xi2, xi3: m(xi3, xi2, xi1)


def in_small_cone(xi1: float, xi2: float, xi3: float, constants: WhitneyConstants = DESK_WHITNEY) -> bool:
    return abs(xi3 - xi2) <= abs(xi1 - (xi2 + xi3) / 2) / constants.c_hi


def diagonal_dist(xi) -> float:
    xi = np.asarray(xi, dtype=float)
    return float(np.linalg.norm(xi - xi.mean()))


def symbol_estimate_probe(m: Callable, points, h_rel: float = 1e-3) -> list[dict]:
    """Central finite differences of orders 1 and 2 scaled by ``dist(xi, diagonal)^|alpha|``."""
    rows = []
    for p in points:
        p = np.asarray(p, dtype=float)
        d = diagonal_dist(p)
        h = h_rel * d
        f0 = m(*p)
        worst1 = worst2 = 0.0
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fp, fm = m(*(p + e)), m(*(p - e))
            worst1 = max(worst1, abs(fp - fm) / (2 * h) * d)
            worst2 = max(worst2, abs(fp - 2 * f0 + fm) / h**2 * d**2)
        rows.append({"xi": tuple(p), "value": f0, "first": worst1, "second": worst2})
    return rows
