"""Sampled periodic functions, wave packets and direct multiplier evaluation.

Frequencies are measured in cycles per unit length. A function on the
window ``[0, L)`` with ``N`` samples has Fourier coefficients ``c_b`` on the
signed bins ``b in [-N/2, N/2)``, frequency ``b / L``, and
``f(x_n) = sum_b c_b exp(2 pi i b x_n / L)``. Inner products carry the
quadrature weight ``L / N``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from .grid import ApproxCutoff, as_fraction, cutoff_value
from .tiles import Tile

DEFAULT_BUDGET = 5 * 10**7
DECAY_ORDERS = (2, 4, 8)
# the bump occupies this fraction of omega_P
SUPPORT_FRACTION = Fraction(9, 10)


class BudgetExceeded(RuntimeError):
    """Direct quadrature would exceed the configured work budget."""


class ResolutionError(ValueError):
    """A tile does not fit the sampling grid."""


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex samples of a function on the periodic window ``[0, L)``."""

    L: float
    N: int
    values: np.ndarray
    _spectrum: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("sample count must be a power of two")
        if not self.L > 0:
            raise ValueError("window length must be positive")
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.N,):
            raise ValueError(f"expected {self.N} samples, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_spectrum(cls, L: float, N: int, spectrum: np.ndarray) -> "SampledFunction":
        """Build from coefficients in FFT order; the coefficients are kept exactly."""
        c = np.array(spectrum, dtype=np.complex128)
        c.setflags(write=False)
        return cls(L, N, np.fft.ifft(c) * N, c)

    @classmethod
    def constant(cls, L: float, N: int, value: complex = 1.0) -> "SampledFunction":
        c = np.zeros(N, dtype=np.complex128)
        c[0] = value
        return cls.from_spectrum(L, N, c)

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Coefficients ``c_b`` in FFT order (bin ``b`` at index ``b mod N``)."""
        if self._spectrum is not None:
            return self._spectrum
        c = np.fft.fft(self.values) / self.N
        c.setflags(write=False)
        return c

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * (self.L / self.N)

    @cached_property
    def bins(self) -> np.ndarray:
        """Signed bin of each FFT index."""
        return signed_bins(self.N)

    def same_grid(self, other: "SampledFunction") -> bool:
        return self.L == other.L and self.N == other.N

    def norm(self) -> float:
        return math.sqrt(self.L / self.N) * float(np.linalg.norm(self.values))

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        _require_grid(self, other)
        return SampledFunction(self.L, self.N, self.values + other.values)

    def scale(self, a: complex) -> "SampledFunction":
        return SampledFunction(self.L, self.N, a * self.values)

    # serialization: one JSON header line, then little-endian complex samples
    def to_bytes(self, dtype: str = "complex128") -> bytes:
        if dtype not in ("complex64", "complex128"):
            raise ValueError("dtype must be complex64 or complex128")
        header = json.dumps({"L": self.L, "N": self.N, "dtype": dtype}).encode()
        body = self.values.astype(np.dtype(dtype).newbyteorder("<")).tobytes()
        return header + b"\n" + body

    @classmethod
    def from_bytes(cls, blob: bytes) -> "SampledFunction":
        head, _, body = blob.partition(b"\n")
        meta = json.loads(head)
        dt = np.dtype(meta["dtype"]).newbyteorder("<")
        vals = np.frombuffer(body, dtype=dt).astype(np.complex128)
        return cls(float(meta["L"]), int(meta["N"]), vals)


def signed_bins(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, 1.0 / N).astype(np.int64)


def _require_grid(a: SampledFunction, b: SampledFunction) -> None:
    if not a.same_grid(b):
        raise ValueError(f"grid mismatch: (L={a.L}, N={a.N}) vs (L={b.L}, N={b.N})")


def random_function(seed: int, L: float, N: int, band: int | None = None) -> SampledFunction:
    """Random function with Gaussian coefficients on bins ``|b| <= band``."""
    rng = np.random.default_rng(seed)
    band = N // 4 if band is None else band
    b = signed_bins(N)
    c = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / math.sqrt(2 * (2 * band + 1))
    c[np.abs(b) > band] = 0
    return SampledFunction.from_spectrum(L, N, c)


# ---------------------------------------------------------------------------
# wave packets


def eta(t: np.ndarray) -> np.ndarray:
    """``exp(1 - 1/(1 - t^2))`` on ``|t| < 1`` and zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


BUMPS: dict[str, Callable[[np.ndarray], np.ndarray]] = {"eta": eta}


@dataclass(frozen=True, eq=False)
class WavePacket:
    """Unit-norm packet of one tile together with its sparse spectrum."""

    tile: Tile
    function: SampledFunction
    bins: np.ndarray
    coefficients: np.ndarray
    bump: str = "eta"

    @property
    def values(self) -> np.ndarray:
        return self.function.values

    def decay_constant(self, M: int) -> float:
        """``max_x |phi(x)| |I|^(1/2) / chi(x)^M`` with periodic distance to the center of I."""
        f = self.function
        I = self.tile.I
        d = np.abs(f.x - float(I.center))
        d = np.minimum(d, f.L - d)
        w = cutoff_value(ApproxCutoff(0.0, float(I.length), M), d)
        return float(np.max(np.abs(f.values) * math.sqrt(float(I.length)) / w))


def packet_support(tile: Tile, L: float, N: int) -> np.ndarray:
    """Signed bins strictly inside ``(9/10) omega``, ascending."""
    Lf = as_fraction(L)
    lo, hi = (x * Lf for x in tile.omega.dilate(SUPPORT_FRACTION))
    first, last = math.floor(lo) + 1, math.ceil(hi) - 1
    return np.arange(first, last + 1, dtype=np.int64)


def check_resolution(tile: Tile, L: float, N: int, min_bins: int = 8) -> np.ndarray:
    Lf = as_fraction(L)
    lo, hi = tile.I.bounds
    if lo < 0 or hi > Lf:
        raise ResolutionError(f"spatial interval [{lo}, {hi}) leaves the window [0, {L})")
    wlo, whi = tile.omega.bounds
    if wlo * Lf < -(N // 2) or whi * Lf > N // 2:
        raise ResolutionError(f"frequency interval [{wlo}, {whi}) leaves the sampled band")
    support = packet_support(tile, L, N)
    if len(support) < min_bins:
        raise ResolutionError(
            f"only {len(support)} bins inside (9/10) omega; at least {min_bins} are required"
        )
    return support


def random_tiles(seed: int, count: int, L: float = 16, N: int = 1024, space_exps=(-2, -1, 0)) -> list[Tile]:
    """Seeded resolvable tiles with random scale, position, frequency and shift."""
    from .grid import SHIFTS
    from .tiles import make_tile

    rng = np.random.default_rng(seed)
    out: list[Tile] = []
    while len(out) < count:
        e = int(rng.choice(space_exps))
        k = int(rng.integers(0, int(as_fraction(L) / Fraction(2) ** e)))
        band = int((N // 2) / as_fraction(L) * Fraction(2) ** e)
        tile = make_tile(e, k, int(rng.integers(-band, band)), SHIFTS[int(rng.integers(0, 3))])
        try:
            check_resolution(tile, L, N)
        except ResolutionError:
            continue
        out.append(tile)
    return out


def make_packet(tile: Tile, L: float, N: int, bump: str = "eta", min_bins: int = 8) -> WavePacket:
    """Packet with spectrum ``bump((xi - xi_P) / (0.45 |omega|))`` translated to the center of I.

    Offsets and phases are computed with exact fractions so a tile moved by
    a whole number of bins yields exactly the modulated packet.
    """
    support = check_resolution(tile, L, N, min_bins)
    Lf = as_fraction(L)
    xi, width, x0 = tile.xi, tile.omega.length, tile.I.center
    half = SUPPORT_FRACTION / 2 * width
    offsets = [Fraction(int(b)) / Lf - xi for b in support]
    t = np.array([float(o / half) for o in offsets])
    phase = np.array([float((o * x0) % 1) for o in offsets])
    amp = BUMPS[bump](t)
    norm = math.sqrt(float(L) * float(np.sum(amp * amp)))
    coeff = (amp / norm) * np.exp(-2j * np.pi * phase)
    spec = np.zeros(N, dtype=np.complex128)
    spec[support % N] = coeff
    return WavePacket(tile, SampledFunction.from_spectrum(float(L), N, spec), support, coeff, bump)


def inner(f: SampledFunction | WavePacket, g: SampledFunction | WavePacket) -> complex:
    """``(L/N) sum f conj(g)``, evaluated through Parseval on the packet support."""
    if isinstance(g, WavePacket):
        ff = f.function if isinstance(f, WavePacket) else f
        _require_grid(ff, g.function)
        return complex(ff.L * np.sum(ff.spectrum[g.bins % ff.N] * np.conj(g.coefficients)))
    if isinstance(f, WavePacket):
        return inner(g, f).conjugate()
    _require_grid(f, g)
    return complex(f.L / f.N * np.sum(f.values * np.conj(g.values)))


def synthesize(coeffs, packets, L: float, N: int) -> SampledFunction:
    """``sum_P c_P phi_P`` as a sampled function."""
    spec = np.zeros(N, dtype=np.complex128)
    for c, p in zip(coeffs, packets):
        np.add.at(spec, p.bins % N, c * p.coefficients)
    return SampledFunction.from_spectrum(L, N, spec)


def riesz_project(f: SampledFunction) -> SampledFunction:
    """Keep only the strictly positive bins."""
    c = np.array(f.spectrum)
    c[f.bins <= 0] = 0
    return SampledFunction.from_spectrum(f.L, f.N, c)


# ---------------------------------------------------------------------------
# direct quadrature


def _support(f: SampledFunction) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero signed bins in ascending order and their coefficients."""
    b = f.bins
    order = np.argsort(b, kind="stable")
    c = f.spectrum[order]
    keep = c != 0
    return b[order][keep], c[keep]


def direct_B(f1: SampledFunction, f2: SampledFunction) -> SampledFunction:
    """``sum_{b1 < b2} c1(b1) c2(b2)`` placed on bin ``b1 + b2`` (cyclically)."""
    _require_grid(f1, f2)
    N = f1.N
    b1, c1 = _support(f1)
    b2, c2 = _support(f2)
    out = np.zeros(N, dtype=np.complex128)
    for i in range(len(b1)):
        m = b2 > b1[i]
        np.add.at(out, (b1[i] + b2[m]) % N, c1[i] * c2[m])
    return SampledFunction.from_spectrum(f1.L, N, out)


def direct_Tm(
    m: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None,
    f1: SampledFunction,
    f2: SampledFunction,
    f3: SampledFunction,
    budget: int = DEFAULT_BUDGET,
    ordered: bool = False,
) -> SampledFunction:
    """Trilinear multiplier form on the grid.

    ``m`` receives frequency arrays ``(xi1, xi2, xi3)`` and returns weights;
    ``None`` means ``m = 1``. With ``ordered`` only ``b1 < b2 < b3`` enter.
    Terms are accumulated in lexicographic bin order for reproducibility.
    """
    _require_grid(f1, f2)
    _require_grid(f1, f3)
    N, L = f1.N, f1.L
    b1, c1 = _support(f1)
    b2, c2 = _support(f2)
    b3, c3 = _support(f3)
    work = len(b1) * len(b2) * len(b3)
    if work > budget:
        raise BudgetExceeded(f"{work} products exceed the budget {budget}")
    out = np.zeros(N, dtype=np.complex128)
    B2, B3 = np.meshgrid(b2, b3, indexing="ij")
    C23 = np.multiply.outer(c2, c3)
    for i in range(len(b1)):
        if ordered:
            mask = (B2 > b1[i]) & (B3 > B2)
        else:
            mask = np.ones(B2.shape, dtype=bool)
        if not mask.any():
            continue
        terms = c1[i] * C23[mask] if c1[i] != 1 else C23[mask]
        if m is not None:
            terms = terms * m(np.full(mask.sum(), b1[i] / L), B2[mask] / L, B3[mask] / L)
        np.add.at(out, (b1[i] + B2[mask] + B3[mask]) % N, terms)
    return SampledFunction.from_spectrum(L, N, out)


def direct_T(f1, f2, f3, budget: int = DEFAULT_BUDGET) -> SampledFunction:
    """The multiplier ``1_{xi1 < xi2 < xi3}`` with strict bin inequalities."""
    return direct_Tm(None, f1, f2, f3, budget, ordered=True)
