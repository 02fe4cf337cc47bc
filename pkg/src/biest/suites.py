"""Quick verification suites, one per module, used by ``biest verify``.

Each suite returns a list of ``Check``. Exact checks assert identities or
inequalities with constant one; measured checks compare against the
calibrated constants.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import calibration
from .config import RunConfig


@dataclass
class Check:
    name: str
    ok: bool
    kind: str  # "exact" or "measured"
    value: object = None

    def to_json(self) -> dict:
        d = asdict(self)
        if not isinstance(d["value"], (int, float, str, bool, list, dict, type(None))):
            d["value"] = str(d["value"])
        return d


def suite_grid(cfg: RunConfig) -> list[Check]:
    from .grid import dyadic_maximal, maximal_superlevel, measure

    out = []
    rng = np.random.default_rng(cfg.seeds[0] if cfg.seeds else 0)
    worst = 0.0
    for _ in range(20):
        pieces = [(Fraction(int(k), 8), Fraction(int(k) + 1, 8)) for k in rng.choice(128, size=12, replace=False)]
        level = Fraction(int(rng.integers(1, 8)), 8)
        sup = maximal_superlevel(pieces, level)
        # weak type (1,1) of the dyadic maximal function with constant one
        worst = max(worst, float(measure(sup) * level / measure(pieces)))
        for lo, hi in sup[:3]:
            if not dyadic_maximal(pieces, (lo + hi) / 2) > level:
                out.append(Check("superlevel_membership", False, "exact", [str(lo), str(hi)]))
    out.append(Check("maximal_weak_type", worst <= 1, "exact", worst))
    out.append(Check("empty_superlevel_at_one", maximal_superlevel([(Fraction(0), Fraction(1))], 1) == [], "exact"))
    return out


def suite_tiles(cfg: RunConfig) -> list[Check]:
    from .tiles import check_rank1, dump_tiles, gen_rank1, load_tiles

    c = cfg.order_constants
    ok_rank, ok_round = True, True
    for s in cfg.seeds[:5]:
        tiles = gen_rank1(int(s), 12, (-10, 0), c)
        ok_rank &= check_rank1(tiles, c).ok
        ok_round &= load_tiles(dump_tiles(tiles)) == list(tiles)
    det = gen_rank1(0, 10, (-10, 0), c) == gen_rank1(0, 10, (-10, 0), c)
    return [
        Check("gen_rank1_is_rank1", ok_rank, "exact"),
        Check("dump_load_roundtrip", ok_round, "exact"),
        Check("gen_rank1_deterministic", det, "exact"),
    ]


def suite_functionals(cfg: RunConfig) -> list[Check]:
    from .decomp import random_instance
    from .functionals import energy, modified_energy, size

    ok_le, ok_mono, ok_size = True, True, True
    for s in cfg.seeds[:8]:
        seqs = random_instance(int(s), (3, 8))
        a = seqs[0]
        res = modified_energy(a)
        me = res.value
        # constant-one domination is only guaranteed when the witness trees are singletons
        if all(len(t.members) == 1 for t in res.detail.get("trees", [])):
            ok_le &= me <= energy(a).upper * (1 + 1e-12)
        sub = a.restrict(a.universe[: max(1, len(a) // 2)])
        ok_mono &= modified_energy(sub).value <= me * (1 + 1e-12)
        ok_size &= size(sub).value <= size(a).value * (1 + 1e-12)
    return [
        Check("singleton_witness_domination", ok_le, "exact"),
        Check("modified_energy_monotone", ok_mono, "exact"),
        Check("size_monotone", ok_size, "exact"),
    ]


def suite_decomp(cfg: RunConfig) -> list[Check]:
    from .decomp import random_tree, selection_instance, selection_run, selection_violations, tree_form
    from .functionals import CoefficientSequence
    from .tiles import DESK

    bad = 0
    for s in range(20):
        tree, maps = random_tree(s, 1 + s % 12)
        seqs = [CoefficientSequence.from_map(m, j + 1, DESK) for j, m in enumerate(maps)]
        bad += not tree_form(tree, *seqs).holds
    viol: dict = {}
    for s in cfg.seeds[:5]:
        for k, v in selection_violations(selection_run(selection_instance(int(s)))).items():
            viol[k] = viol.get(k, 0) + v
    return [Check("tree_estimate", bad == 0, "exact", bad), Check("selection_postconditions", not viol, "exact", viol)]


def suite_whitney(cfg: RunConfig) -> list[Check]:
    from .whitney import SymbolSeries, brute_force_cover, check_cube_rank1, probe, probe_grid, refine_rank1, whitney_cover

    wc = cfg.whitney_constants
    # a box meeting the plane but not the singular line, so the cover is finite
    box = [(Fraction(1), Fraction(3, 2)), (Fraction(-1, 2), Fraction(0)), (Fraction(-2), Fraction(-1))]
    sigma = (Fraction(1, 3), 0, Fraction(2, 3))
    cover = whitney_cover(sigma, box, wc)
    brute = brute_force_cover(sigma, box, sorted({c.j for c in cover.cubes}), wc)
    same = set(cover.cubes) == set(brute)
    parts = refine_rank1(cover.cubes, wc)
    parts_ok = all(check_cube_rank1(part, wc)[0] for part in parts)
    pts = probe_grid(1.0, 5, 0.25)
    series = SymbolSeries(wc, "2x1=x2", cfg.fourier_K)
    err = max(r[2] for r in probe(series, pts))
    return [
        Check("cover_matches_brute_force", same, "exact", len(cover.cubes)),
        Check("rank1_refinement", parts_ok, "exact", len(parts)),
        Check("reconstruction_error", err < 1e-2, "measured", err),
    ]


def suite_forms(cfg: RunConfig) -> list[Check]:
    from . import forms
    from .packets import random_function

    ex = forms.exponents_for_vertex((-0.45, 0.93, 0.04, 0.48), "A9")
    ok_ex = math.isclose(ex.theta, 12 / 13) and np.allclose(ex.as_tuple()[:3], (0.1, 0.86, 0.04))
    bank = forms.PacketBank(cfg.window.L, cfg.window.N)
    worst = 0.0
    for s in cfg.seeds[:2]:
        rng = np.random.default_rng(int(s))
        P, Q, _ = forms.biest_collections(rng)
        f = [random_function(100 * int(s) + i, cfg.window.L, cfg.window.N) for i in range(4)]
        lam = forms.lambda_biest(P, Q, *f, bank=bank)
        r = forms.rearranged_sum(Q, *forms.rightform(P, Q, *f, bank=bank))
        worst = max(worst, abs(lam - r) / max(abs(lam), 1e-300))
    split = max(forms.split_cor_ratio(int(s), bank) for s in cfg.seeds[:5])
    return [
        Check("vertex_exponents_example", bool(ok_ex), "exact", ex.as_tuple()),
        Check("rearrangement_identity", worst <= 1e-10, "exact", worst),
        Check("split_cor_constant", split <= calibration.MEASURED["split_cor"], "measured", split),
    ]


SUITES = {
    "grid": suite_grid,
    "tiles": suite_tiles,
    "functionals": suite_functionals,
    "decomp": suite_decomp,
    "whitney": suite_whitney,
    "forms": suite_forms,
}
