"""Command line entry point: ``adaptalloc run | bounds | diagnose``.

Exit status: 0 success, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import theory
from .models import ResponseModel
from .montecarlo import boundedness_diagnostic
from .report import LABEL_TO_METRIC, read_csv, run_scenario
from .scenarios import PRESETS, load_config, preset


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _pos_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaptalloc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario over its N grid")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="scenario config file")
    src.add_argument("--preset", help="built-in scenario name")
    src.add_argument("--list-presets", action="store_true")
    run.add_argument("--seed", type=_u64, default=0, help="master seed (default 0)")
    run.add_argument("--reps", type=_pos_int, help="override replications per N")
    run.add_argument("--workers", type=_pos_int, help="worker processes (env ADAPTALLOC_WORKERS)")
    run.add_argument("--out", type=Path, help="write to file instead of stdout")
    run.add_argument("--format", choices=("csv", "text"), default="csv")

    b = sub.add_parser("bounds", help="large-deviation quantities")
    bsub = b.add_subparsers(dest="what", required=True)
    rho = bsub.add_parser("rho", help="Chernoff rate of Z - u")
    rho.add_argument("--u", type=float, required=True)
    rho.add_argument("--p", type=float, help="bernoulli success probability (default: standard normal)")
    tail = bsub.add_parser("tail", help="C rho^k / (1 - rho), capped at 1")
    tail.add_argument("--k", type=int, required=True)
    tail.add_argument("--rho", type=float, required=True)
    tail.add_argument("--c", type=float, default=1.0)
    inf = bsub.add_parser("inference", help="bound on the wrong-decision probability")
    inf.add_argument("--delta", type=float, required=True)
    inf.add_argument("--eps", type=float, default=0.0)
    inf.add_argument("--m-init", type=int, required=True)
    mom = bsub.add_parser("moments", help="stopping-time moments at two horizons")
    mom.add_argument("--u", type=float, required=True)
    mom.add_argument("--p", type=float)
    mom.add_argument("--orders", default="1,2,3")
    mom.add_argument("--horizons", default="200,400")
    mom.add_argument("--runs", type=_pos_int, default=100_000)
    mom.add_argument("--seed", type=_u64, default=0)

    d = sub.add_parser("diagnose", help="boundedness check over result CSVs")
    d.add_argument("results", type=Path, help="directory of CSV files written by 'run'")
    return p


def _shifted(u: float, p: float | None) -> theory.ShiftedModel:
    if p is None:
        return theory.ShiftedModel.standard_normal(u)
    return theory.ShiftedModel(ResponseModel.bernoulli(p), u)


def _cmd_run(args) -> int:
    if args.list_presets:
        for name in sorted(PRESETS):
            print(f"{name:18s} {PRESETS[name].description}")
        return 0
    spec = load_config(args.config) if args.config else preset(args.preset)
    table = run_scenario(spec, args.seed, workers=args.workers, reps=args.reps)
    out = table.to_csv() if args.format == "csv" else table.to_text()
    if args.out:
        args.out.write_text(out, newline="")
    else:
        sys.stdout.write(out)
    return 0


def _cmd_bounds(args) -> int:
    if args.what == "rho":
        model = _shifted(args.u, args.p)
        print(f"rho = {theory.chernoff_rho_numeric(model):.12g}")
        if args.p is None:
            print(f"closed form = {theory.chernoff_rho_normal(args.u):.12g}")
    elif args.what == "tail":
        print(f"{theory.tail_bound(args.k, theory.TailBound(args.rho, args.c)):.12g}")
    elif args.what == "inference":
        print(f"{theory.incorrect_inference_bound(args.delta, args.eps, args.m_init):.12g}")
    else:
        orders = [int(q) for q in args.orders.split(",")]
        h = tuple(int(x) for x in args.horizons.split(","))
        if len(h) != 2:
            raise ValueError("--horizons takes two values")
        r = theory.moment_stability(_shifted(args.u, args.p), orders, h, args.runs, args.seed)
        for q, a, b, c in zip(r.orders, *r.moments, r.rel_change):
            print(f"E[T^{q}]  h={h[0]}: {a:.6g}  h={h[1]}: {b:.6g}  rel change {c:.3g}")
        print("stable" if r.stable else "not stable")
    return 0


def _cmd_diagnose(args) -> int:
    files = sorted(args.results.glob("*.csv"))
    if not files:
        raise FileNotFoundError(f"no CSV files in {args.results}")
    for f in files:
        header, rows = read_csv(f.read_text())
        metrics = [LABEL_TO_METRIC.get(h) for h in header]
        if "n1" in metrics:
            n1_col = metrics.index("n1")
        elif "second_max" in metrics:
            n1_col = metrics.index("second_max")
        else:
            print(f"{f.name}: no E(N1) column, skipped")
            continue
        inf_col = metrics.index("inferior") if "inferior" in metrics else None
        points = []
        for r in rows:
            s = {"mean_n1": r[n1_col]}
            if inf_col is not None:
                s["mean_inferior"] = r[inf_col]
            points.append((int(r[0]), s))
        print(f"{f.name}:")
        for line in boundedness_diagnostic(points).lines():
            print(f"  {line}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": _cmd_run, "bounds": _cmd_bounds, "diagnose": _cmd_diagnose}[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as e:
        print(f"adaptalloc: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
