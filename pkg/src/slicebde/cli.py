"""Command line entry point: ``run``, ``compare`` and ``bench-vi``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .baselines import SchemeId
from .config import load_scenario
from .domain import DomainError, ParameterError
from .harness import RunError, bench_vi, compare, run
from .sim import ConfigError, ProtocolError

SCHEMES = [s.value for s in SchemeId]


def _seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slicebde", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scheme on a scenario and write its per-slot CSV")
    p.add_argument("scenario", type=Path)
    p.add_argument("--scheme", choices=SCHEMES, default="rl")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("compare", help="run several schemes over several seeds")
    p.add_argument("scenario", type=Path)
    p.add_argument("--schemes", nargs="+", choices=SCHEMES, default=SCHEMES)
    p.add_argument("--seeds", type=_seeds, default=[0])
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("bench-vi", help="time value iteration on a random n x n x n model")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--reps", type=int, default=10)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "run":
            scenario = load_scenario(args.scenario)
            report = run(scenario, args.scheme, args.seed)
            path = report.write_csv(args.out / f"{scenario.name}_{args.scheme}_seed{report.seed}.csv")
            agg = report.aggregates
            print(f"{path}: cumulative_cost={agg.cumulative_cost:.1f} avg_bandwidth={agg.avg_bandwidth:.2f} "
                  f"qos_success={agg.qos_success:.3f}")
        elif args.command == "compare":
            scenario = load_scenario(args.scenario)
            rows = compare(scenario, args.schemes, args.seeds, args.out)
            for row in rows:
                print(f"{row['scheme']:>8}  cost {row['cumulative_cost_mean']:12.1f} +- {row['cumulative_cost_std']:.1f}"
                      f"  bw {row['avg_bandwidth_mean']:6.2f}  qos {row['qos_success_mean']:.3f}")
        else:
            if args.n < 2:
                raise ParameterError("--n must be >= 2")
            mean = bench_vi(args.n, args.reps)
            print(f"n={args.n} reps={args.reps} mean_vi_seconds={mean:.6f}")
    except (ConfigError, ParameterError, DomainError, ProtocolError, RunError, OSError) as exc:
        print(f"slicebde: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
