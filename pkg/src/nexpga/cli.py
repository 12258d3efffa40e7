"""``bench`` command line entry point.

    bench run --config exp.cfg --n 1000 --lambda 0.1 --trials 10 --t-max 2 --out results/

Exit status: 0 on success, 1 for configuration errors, 2 when every trial
hit a solver error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import ConfigError, ExperimentConfig, load_config, run_experiment


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write CSVs and plots")
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--n", type=int)
    run.add_argument("--m", type=int)
    run.add_argument("--s", type=int)
    run.add_argument("--lambda", dest="lambdas", type=_float_list, help="comma-separated list")
    run.add_argument("--trials", type=int)
    run.add_argument("--t-max", dest="T_max", type=float, help="seconds per method run")
    run.add_argument("--methods", type=_str_list, help="comma-separated method labels")
    run.add_argument("--seed", type=int)
    run.add_argument("--grid-points", dest="time_grid_points", type=int)
    run.add_argument("--max-iters", dest="max_iters", type=int)
    run.add_argument("--out", dest="output_dir")
    run.add_argument("--no-plots", dest="plots", action="store_false", default=None)
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "verbose") and v is not None}
    try:
        if args.config:
            config = load_config(args.config, **overrides)
        else:
            config = ExperimentConfig(**overrides)
    except ConfigError as exc:
        print(f"bench: config error: {exc}", file=sys.stderr)
        return 1

    result = run_experiment(config)
    for (lam, label), curve in sorted(result.curves.items()):
        print(f"lambda={lam:g} {label:>10s}  E(T_max)={curve.values[-1]:.3e}  trials={curve.trials}")
    if result.failures:
        print(f"{len(result.failures)} failed runs, see failures.csv", file=sys.stderr)
    if result.all_trials_failed:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
