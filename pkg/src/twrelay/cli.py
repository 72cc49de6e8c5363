"""Command line interface: ``twrelay run | trial | oracle``."""

import argparse
import json
import logging
import sys

import numpy as np

from .bs_solver import SingularChannelError
from .harness import (
    METHODS,
    ConfigError,
    ExperimentSpec,
    load_config,
    oracle_comparison,
    run_sweep,
    run_trial,
    sigma_grid,
    summary_path,
    with_overrides,
)


def _spec(path) -> ExperimentSpec:
    return load_config(path) if path else ExperimentSpec()


def _methods(text: str) -> tuple:
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise argparse.ArgumentTypeError(f"methods must be a comma list from {', '.join(METHODS)}")
    return methods


def _cmd_run(args) -> int:
    spec = _spec(args.config)
    sigmas = None
    if any(v is not None for v in (args.sigma_min, args.sigma_max, args.sigma_steps)):
        lo = args.sigma_min if args.sigma_min is not None else spec.sigma_values[0]
        hi = args.sigma_max if args.sigma_max is not None else spec.sigma_values[-1]
        steps = args.sigma_steps if args.sigma_steps is not None else len(spec.sigma_values)
        sigmas = sigma_grid(lo, hi, steps)
    spec = with_overrides(
        spec,
        master_seed=args.seed,
        trials=args.trials,
        sigma_values=sigmas,
        methods=args.methods,
        output_path=args.out,
        workers=args.workers,
    )
    out = run_sweep(spec)
    print(f"wrote {out} and {summary_path(out)}")
    return 0


def _cmd_trial(args) -> int:
    spec = _spec(args.config)
    rec = run_trial(spec.config, args.sigma, args.seed, args.method)
    print(rec.to_json())
    return 0


def _cmd_oracle(args) -> int:
    spec = _spec(args.config)
    rows = oracle_comparison(spec.config, args.sigma, args.instances, args.samples, args.seed)
    ratios = np.array([r["ratio"] for r in rows])
    print(json.dumps({"instances": rows, "min_ratio": float(ratios.min()),
                      "mean_ratio": float(ratios.mean())}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twrelay", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log redraws and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte-Carlo sweep over sigma, written as CSV")
    run.add_argument("--config", help="JSON config file (defaults used when omitted)")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--trials", type=int)
    run.add_argument("--sigma-min", type=float)
    run.add_argument("--sigma-max", type=float)
    run.add_argument("--sigma-steps", type=int)
    run.add_argument("--methods", type=_methods, help="comma list of " + ", ".join(METHODS))
    run.add_argument("--out", help="output CSV path")
    run.add_argument("--workers", type=int, help="worker processes")
    run.set_defaults(func=_cmd_run)

    trial = sub.add_parser("trial", help="one trial, printed as JSON")
    trial.add_argument("--config")
    trial.add_argument("--sigma", type=float, required=True)
    trial.add_argument("--seed", type=int, required=True)
    trial.add_argument("--method", choices=METHODS, required=True)
    trial.set_defaults(func=_cmd_trial)

    oracle = sub.add_parser("oracle", help="LM-bisection vs random search on 2-antenna relays")
    oracle.add_argument("--config")
    oracle.add_argument("--samples", type=int, default=10**6)
    oracle.add_argument("--instances", type=int, default=20)
    oracle.add_argument("--sigma", type=float, default=1.0)
    oracle.add_argument("--seed", type=int, default=0)
    oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError, SingularChannelError, ValueError) as exc:
        print(f"twrelay: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
