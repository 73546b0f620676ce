"""Command-line entry point: ``risma run | sweep | check``."""

from __future__ import annotations

import argparse
import logging
import sys

from .checks import SUITES, self_check
from .harness import SWEEP_PARAMS, SweepSpec, parse_config, run_once, run_sweep
from .model import ConfigError
from .solver import SolverError

EXIT_OK, EXIT_INVALID, EXIT_ORACLE, EXIT_SOLVER = 0, 1, 2, 3


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def build_parser():
    p = argparse.ArgumentParser(prog="risma", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one seeded scenario, write the iteration trace")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None, help="defaults to the config's seed")
    run.add_argument("--out", required=True)
    run.add_argument("--timing", action="store_true",
                     help="fill cum_ms with wall-clock time (output is then not reproducible)")

    sw = sub.add_parser("sweep", help="Monte-Carlo sweep over one parameter")
    sw.add_argument("--config", required=True)
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--values", required=True, type=_floats, help="comma-separated list")
    sw.add_argument("--trials", type=int, default=50)
    sw.add_argument("--variants", default="ma-cps", help="e.g. ma-irc,ma-cps,ma-dps4,fpa-cps")
    sw.add_argument("--seed", type=int, default=None, help="master seed (config seed if unset)")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", required=True)

    ck = sub.add_parser("check", help="run a numerical self-check suite")
    ck.add_argument("suite", choices=sorted(SUITES))
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = parse_config(args.config)
            _, trace, _ = run_once(config, seed=args.seed, out=args.out, timing=args.timing)
            print(f"{trace.status} after {len(trace.records)} iterations: "
                  f"{trace.final_rate:.6f} bit/s/Hz")
        elif args.command == "sweep":
            config = parse_config(args.config)
            spec = SweepSpec(
                param=args.param, values=args.values, trials=args.trials,
                variants=tuple(v.strip() for v in args.variants.split(",") if v.strip()),
                base=config, master_seed=config.seed if args.seed is None else args.seed)
            result = run_sweep(spec, out=args.out, workers=args.workers)
            if result.failures:
                print(f"{result.failures} failed solves excluded", file=sys.stderr)
        else:
            report = self_check(args.suite)
            print(report.text())
            return EXIT_OK if report.passed else EXIT_ORACLE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
