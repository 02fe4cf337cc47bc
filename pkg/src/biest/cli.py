"""Command line: verification suites, decomposition traces, experiments and data dumps.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .config import RunConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _header(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "config": cfg.to_dict(), "config_hash": cfg.digest()}


# ---------------------------------------------------------------------------
# verify


def cmd_verify(cfg: RunConfig, suite: str, out: str | None) -> int:
    from .suites import SUITES

    names = list(SUITES) if suite == "all" else [suite]
    if any(n not in SUITES for n in names):
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)} or all")
    report = _header(cfg, "verify")
    report["suites"] = {}
    ok = True
    for n in names:
        checks = SUITES[n](cfg)
        report["suites"][n] = [c.to_json() for c in checks]
        ok &= all(c.ok for c in checks)
    report["ok"] = ok
    _emit(json.dumps(report, indent=1, sort_keys=True), out)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# decompose


def load_coefficients(text: str, cfg: RunConfig, slot: int | None):
    """Parse ``{"tiles": [...], "coefficients": {...}}`` into three sequences on one universe.

    ``coefficients`` maps slot numbers to lists of ``{tile_id, re, im}``;
    a bare list is read into ``slot``. Missing slots are zero.
    """
    import numpy as np

    from .functionals import CoefficientSequence
    from .tiles import tritile_from_json

    try:
        rec = json.loads(text)
        universe = tuple(tritile_from_json(r) for r in rec["tiles"])
        coeffs = rec["coefficients"]
        if isinstance(coeffs, list):
            coeffs = {str(slot or 1): coeffs}
        vals = {j: np.zeros(len(universe), dtype=np.complex128) for j in (1, 2, 3)}
        for key, rows in coeffs.items():
            j = int(key)
            if j not in (1, 2, 3):
                raise ValueError(f"slot {j} out of range")
            for r in rows:
                vals[j][int(r["tile_id"])] = complex(r["re"], r["im"])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise UsageError(f"malformed coefficient file: {exc}") from exc
    c = cfg.order_constants
    return [CoefficientSequence(universe, vals[j], j, c) for j in (1, 2, 3)]


def decompose_trace(seqs) -> dict:
    import numpy as np

    from .decomp import partition
    from .tiles import tritile_to_json

    alive = [p for n, p in enumerate(seqs[0].universe) if any(s.values[n] != 0 for s in seqs)]
    if not alive:
        return {"levels": [], "tiles": 0}
    seqs = [s.restrict(alive) for s in seqs]
    levels = partition(*seqs)
    out = []
    for lev in levels:
        out.append(
            {
                "n": lev.n,
                "tiles": [tritile_to_json(p) for p in lev.tiles],
                "trees": [
                    {"kind": t.kind, "top": tritile_to_json(t.top), "members": [tritile_to_json(p) for p in t.members]}
                    for t in lev.trees
                ],
                "cover_length": lev.cover_length(),
                "cover_over_4n": lev.cover_length() / 4.0**lev.n,
            }
        )
    return {"levels": out, "tiles": int(np.sum([len(lev.tiles) for lev in levels]))}


def cmd_decompose(cfg: RunConfig, path: str, slot: int | None, out: str | None) -> int:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    seqs = load_coefficients(text, cfg, slot)
    report = _header(cfg, "decompose")
    report["trace"] = decompose_trace(seqs)
    _emit(json.dumps(report, indent=1, sort_keys=True), out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment


def _parse_alpha(text: str) -> tuple[float, ...]:
    from fractions import Fraction

    try:
        return tuple(float(Fraction(x.strip())) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"cannot parse alpha {text!r}") from exc


def resolve_experiment(kind: str, alpha: str | None, vertex: str | None) -> tuple[tuple, str | None]:
    from . import forms

    if kind == "bht":
        a = _parse_alpha(alpha) if alpha else forms.EXPERIMENT_ALPHA["bht"]
        try:
            forms.exponents_bht(a)
        except ValueError as exc:
            raise UsageError(f"inadmissible alpha: {exc}") from exc
        return a, None
    if alpha is None:
        if vertex not in forms.EXPERIMENT_ALPHA:
            raise UsageError("give --alpha, or --vertex A2 / A9 for the default nearby exponents")
        a = forms.EXPERIMENT_ALPHA[vertex]
    else:
        a = _parse_alpha(alpha)
    try:
        tup = forms.AdmissibleTuple(a)
        if vertex is None:
            vertex = min(forms.VERTICES, key=tup.distance)
        forms.exponents_for_vertex(tup, vertex)
    except ValueError as exc:
        raise UsageError(f"inadmissible alpha: {exc}") from exc
    return a, vertex


def experiment_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["seed", "E_sizes", "lambda_abs", "ratio", "sup_bound", "omega_measure", "major_ok"])
    for r in report["per_instance"]:
        w.writerow(
            [r["seed"], " ".join(f"{x:g}" for x in r["E_sizes"]), r["lambda_abs"], r["ratio"], r["sup_bound"], r["omega_measure"], r["major_ok"]]
        )
    return buf.getvalue()


def cmd_experiment(cfg, kind, alpha, vertex, seed, count, dry_run, out) -> int:
    from . import calibration, forms

    a, vertex = resolve_experiment(kind, alpha, vertex)
    seeds = list(range(seed, seed + count)) if seed is not None else list(cfg.seeds)
    plan = _header(cfg, "experiment")
    plan.update({"kind": kind, "alpha": list(a), "vertex": vertex, "seeds": seeds, "C": cfg.exceptional_C})
    if dry_run:
        plan["plan"] = ["exceptional_set", "stratify_k", "lambda_" + kind, "ratio |lambda| / |E|^alpha"]
        _emit(json.dumps(plan, indent=1, sort_keys=True), out)
        return EXIT_OK
    report = forms.restricted_type_experiment(a, vertex, seeds, kind=kind, C=cfg.exceptional_C)
    key = "bht" if kind == "bht" else vertex
    c_exp = calibration.C_EXP.get(key)
    report.update({k: plan[k] for k in ("command", "config", "config_hash")})
    report["C_exp"] = c_exp
    report["within_calibrated"] = None if c_exp is None else report["max_ratio"] <= c_exp
    text = json.dumps(report, indent=1, sort_keys=True)
    _emit(text, out)
    if out:
        Path(out).with_suffix(".csv").write_text(experiment_csv(report))
    return EXIT_OK


# ---------------------------------------------------------------------------
# dumps


def cmd_dump_tiles(cfg: RunConfig, collection: str, seed: int, count: int, out: str | None) -> int:
    from .tiles import dump_tiles, gen_rank1

    if count == 0:
        _emit(dump_tiles([]), out)
        return EXIT_OK
    if collection == "rank1":
        tiles, trees = gen_rank1(seed, count, (-10, 0), cfg.order_constants), None
    else:
        from .forms import tree_ensemble

        tiles, trees = tree_ensemble(seed, count, 0)
    _emit(dump_tiles(tiles, trees), out)
    return EXIT_OK


def cmd_reconstruct_symbol(cfg: RunConfig, K: int, singular: str, steps: int, half_width: float, delta: float, out) -> int:
    from .whitney import SINGULAR, SymbolSeries, probe, probe_csv, probe_grid

    if singular not in SINGULAR:
        raise UsageError(f"unknown singular line {singular!r}; choose from {', '.join(SINGULAR)}")
    if K < 1:
        raise UsageError("K must be at least 1")
    series = SymbolSeries(cfg.whitney_constants, singular, K)
    rows = probe(series, probe_grid(half_width, steps, delta, singular))
    _emit(probe_csv(rows), out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps a value given before the subcommand from being reset
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON run configuration")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (stdout when omitted)")
    ap = argparse.ArgumentParser(prog="biest", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON run configuration (defaults are used for missing keys)")
    ap.add_argument("--out", help="output file (stdout when omitted)")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    v = add("verify", help="run a module's invariant checks")
    v.add_argument("--suite", default="all")

    d = add("decompose", help="level partition of a coefficient file")
    d.add_argument("input")
    d.add_argument("--slot", type=int, choices=(1, 2, 3), help="slot of a bare coefficient list")

    e = add("experiment", help="restricted-type experiment")
    e.add_argument("--kind", choices=("bht", "biest"), default="biest")
    e.add_argument("--alpha", help="comma separated exponents, fractions allowed")
    e.add_argument("--vertex", help="vertex name such as A2 or A9")
    e.add_argument("--seed", type=int, help="first seed; overrides the configured seed list")
    e.add_argument("--count", type=int, default=10, help="number of seeds when --seed is given")
    e.add_argument("--dry-run", action="store_true", help="print the resolved plan only")

    t = add("dump-tiles", help="tile collection as JSON for phase-plane plots")
    t.add_argument("--collection", choices=("rank1", "trees"), default="rank1")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--count", type=int, default=12)

    r = add("reconstruct-symbol", help="truncated Fourier reconstruction on a probe grid (CSV)")
    r.add_argument("--K", type=int, default=None)
    r.add_argument("--singular", default="2x1=x2")
    r.add_argument("--steps", type=int, default=11)
    r.add_argument("--half-width", type=float, default=1.0)
    r.add_argument("--delta", type=float, default=0.25)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite, args.out)
        if args.command == "decompose":
            return cmd_decompose(cfg, args.input, args.slot, args.out)
        if args.command == "experiment":
            return cmd_experiment(cfg, args.kind, args.alpha, args.vertex, args.seed, args.count, args.dry_run, args.out)
        if args.command == "dump-tiles":
            return cmd_dump_tiles(cfg, args.collection, args.seed, args.count, args.out)
        if args.command == "reconstruct-symbol":
            K = args.K if args.K is not None else cfg.fourier_K
            return cmd_reconstruct_symbol(cfg, K, args.singular, args.steps, args.half_width, args.delta, args.out)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
