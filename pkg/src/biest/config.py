"""Run configuration shared by the command line and the verification suites."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .tiles import OrderConstants
from .whitney import WhitneyConstants


@dataclass(frozen=True)
class Window:
    L: float = 16
    N: int = 1024


@dataclass(frozen=True)
class Budgets:
    exact_energy: int = 20
    exact_modified_energy: int = 8
    direct_t_bins: int = 5 * 10**7


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run; serialized with its defaults into each report."""

    window: Window = field(default_factory=Window)
    order: dict = field(default_factory=lambda: {"c_order": 3, "c_lesssim": 10**7, "c_scale": 10**9})
    desk: dict | None = field(default_factory=lambda: {"c_order": 3, "c_lesssim": 8, "c_scale": 16})
    whitney: dict = field(default_factory=lambda: {"c_lo": 4, "c_hi": 16, "c_lesssim": 8, "c_scale": 16})
    seeds: tuple = tuple(range(10))
    budgets: Budgets = field(default_factory=Budgets)
    exceptional_C: float = 8
    fourier_K: int = 5
    out: str = "out"

    def __post_init__(self):
        N = self.window.N
        if N <= 0 or N & (N - 1):
            raise ValueError("N must be a power of two")
        if self.window.L <= 0:
            raise ValueError("L must be positive")
        for name in ("exact_energy", "exact_modified_energy", "direct_t_bins"):
            if getattr(self.budgets, name) <= 0:
                raise ValueError(f"budget {name} must be positive")
        if self.fourier_K < 1:
            raise ValueError("fourier_K must be at least 1")
        if self.exceptional_C <= 0:
            raise ValueError("exceptional_C must be positive")
        # constructing the constants runs their own validation
        OrderConstants(**self.order)
        self.order_constants
        self.whitney_constants

    @property
    def order_constants(self) -> OrderConstants:
        """Desk overrides when present, otherwise the literal constants."""
        return OrderConstants(**(self.desk if self.desk is not None else self.order))

    @property
    def whitney_constants(self) -> WhitneyConstants:
        return WhitneyConstants(**self.whitney)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        if "window" in kw:
            kw["window"] = Window(**kw["window"])
        if "budgets" in kw:
            kw["budgets"] = Budgets(**kw["budgets"])
        if "seeds" in kw:
            kw["seeds"] = tuple(int(s) for s in kw["seeds"])
        for key in ("order", "whitney"):
            if key in kw:
                kw[key] = {**getattr(cls(), key), **kw[key]}
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        return cls.from_dict(json.loads(Path(path).read_text()))
