"""Regenerate src/biest/calibration.py from pilot seeds.

Pilot seeds never overlap the seeds used by the tests and the acceptance
suite (0 to 999). Upper constants are the pilot maximum times MARGIN;
windows are widened by MARGIN on both sides.

    python3 scripts/calibrate.py [--dry-run]
"""

from __future__ import annotations

import argparse
import pprint
from pathlib import Path

from biest import decomp, forms
from biest.functionals import jn_compare
from biest.packets import DECAY_ORDERS, make_packet, random_tiles

MARGIN = 2.0
PILOT = range(1000, 1060)
ABSTRACT_PILOT = range(10_000, 10_300)
TARGET = Path(__file__).resolve().parents[1] / "src" / "biest" / "calibration.py"


def decay_golden() -> dict:
    tiles = random_tiles(0, 50)
    return {M: max(make_packet(t, 16, 1024).decay_constant(M) for t in tiles) for M in DECAY_ORDERS}


def abstract_constants() -> dict:
    ratios, refined = [], []
    for s in ABSTRACT_PILOT:
        seqs = decomp.random_instance(s)
        for theta in ((1 / 3, 1 / 3, 1 / 3), (0.6, 0.2, 0.2)):
            b = decomp.abstract_bound(*seqs, theta)
            ratios.append(b.ratio)
            refined.append(b.refined_ratio)
    return {"ratio": MARGIN * max(ratios), "refined": MARGIN * max(refined)}


def experiment_constants() -> dict:
    bank = forms.PacketBank()
    out = {}
    for name in ("A2", "A9"):
        tup = forms.AdmissibleTuple(forms.EXPERIMENT_ALPHA[name])
        out[name] = MARGIN * max(i.bound / i.weight for i in (forms.biest_instance(s, tup, 8, bank) for s in PILOT))
    alpha = forms.EXPERIMENT_ALPHA["bht"]
    out["bht"] = MARGIN * max(i.bound / i.weight for i in (forms.bht_instance(s, alpha, 8, bank) for s in PILOT))
    return out


def measured_constants() -> dict:
    bank = forms.PacketBank()
    harness = {
        "l2": lambda s: forms.l2_ratio(s, bank),
        "energy_lemma": lambda s: forms.energy_lemma_ratio(s, bank),
        "size_lemma_2": lambda s: forms.size_lemma_ratio(s, bank, 2),
        "size_lemma_4": lambda s: forms.size_lemma_ratio(s, bank, 4),
        "bht_size": lambda s: forms.bht_size_ratio(s, bank),
        "bht_energy": lambda s: forms.bht_energy_ratio(s, bank),
        "split_cor": lambda s: forms.split_cor_ratio(s, bank),
    }
    return {k: MARGIN * max(f(s) for s in PILOT) for k, f in harness.items()}


def jn_window() -> tuple[float, float]:
    vals = [jn_compare(decomp.jn_instance(s)).ratio for s in PILOT[:30]]
    return (min(vals) / MARGIN, max(vals) * MARGIN)


def render(values: dict) -> str:
    lines = [
        '"""Pilot-calibrated constants; regenerate with scripts/calibrate.py."""',
        "",
        f"MARGIN = {MARGIN!r}",
        f"PILOT_SEEDS = ({PILOT.start}, {PILOT.stop})",
        "",
    ]
    for k, v in values.items():
        lines.append(f"{k} = {pprint.pformat(v)}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dry-run", action="store_true", help="print instead of writing")
    args = ap.parse_args(argv)
    values = {
        "DECAY_GOLDEN": decay_golden(),
        "ABSTRACT": abstract_constants(),
        "C_EXP": experiment_constants(),
        "MEASURED": measured_constants(),
        "JN_WINDOW": jn_window(),
    }
    text = render(values)
    if args.dry_run:
        print(text)
    else:
        TARGET.write_text(text)
        print(f"wrote {TARGET}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
