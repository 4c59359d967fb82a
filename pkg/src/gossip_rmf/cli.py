"""Command line entry point: ``gossip-rmf run|verify|bench``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiment
from .verify import run_checks, time_meanfield

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


def _methods(value):
    return [m.strip() for m in value.split(",") if m.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gossip-rmf", description="Mean-field and simulation experiments for the gossip shuffle protocol.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config (file path or preset name fig1/fig3/fig5/fig7/fig8)")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--t-max", type=int, dest="t_max")
    run.add_argument("--runs", type=int)
    run.add_argument("--methods", type=_methods, help="comma separated subset of " + ",".join(experiment.METHODS))
    run.add_argument("--out", help="CSV path; a plotting script is written next to it. Default: CSV on stdout")

    sub.add_parser("verify", help="run the built-in property checks")

    bench = sub.add_parser("bench", help="time classic and refined mean field")
    bench.add_argument("--t-max", type=int, dest="t_max", default=1500)
    bench.add_argument("--sizes", type=_methods, default=["100", "2500"], help="population sizes, comma separated")
    return parser


def _run(args) -> int:
    try:
        cfg = experiment.load_config(args.config)
        cfg = cfg.with_overrides(seed=args.seed, t_max=args.t_max, runs=args.runs, methods=args.methods, out=args.out)
    except experiment.ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        table = experiment.run(cfg)
        if cfg.out:
            csv_path = experiment.write_csv(table, cfg.out)
            script = experiment.write_plot_script(table, csv_path.with_name(csv_path.stem + "_plot.py"), csv_path)
            print(f"wrote {csv_path} and {script}", file=sys.stderr)
        else:
            sys.stdout.write(experiment.csv_text(table))
    except Exception as e:  # noqa: BLE001 - every runtime failure maps to one exit code
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _verify() -> int:
    results = run_checks()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY


def _bench(args) -> int:
    try:
        sizes = [int(x) for x in args.sizes]
    except ValueError:
        print("config error: --sizes must be integers", file=sys.stderr)
        return EXIT_CONFIG
    for N in sizes:
        t = time_meanfield(N, args.t_max)
        print(f"N={N}, t_max={args.t_max}: {t.classic:.3f}s (classic mean field); {t.refined:.3f}s (refined mean field)")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _run(args)
    if args.command == "verify":
        return _verify()
    return _bench(args)


if __name__ == "__main__":
    sys.exit(main())
