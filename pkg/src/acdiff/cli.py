"""Command-line experiment driver.

Usage: acdiff <experiment> [--config FILE] [--eps LIST] [--seed N]
              [--out DIR] [--paths N] [--no-correction] [--set key=value ...]

Exit codes: 0 when every threshold check configured for the run passed
(or none were configured), 2 when the run completed but a threshold was
missed, 1 on execution errors.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    parse_config_file,
    run_experiment,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acdiff",
                                     description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--eps", help="comma-separated eps list override")
        p.add_argument("--seed", type=int, help="base seed override")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--paths", type=int, help="Monte-Carlo path count override")
        p.add_argument("--no-correction", action="store_true",
                       help="drop the acceleration correction (naive drift only)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key")
    return parser


def resolve_config(args) -> ExperimentConfig:
    raw = parse_config_file(args.config) if args.config else {}
    if args.eps:
        raw["eps"] = args.eps
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    if args.out:
        raw["out"] = args.out
    if args.paths is not None:
        raw["n_paths"] = str(args.paths)
    if args.no_correction:
        raw["correction"] = "0"
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        raw[key.strip()] = val.strip()
    raw.pop("experiment", None)  # the subcommand is authoritative
    return ExperimentConfig(experiment=args.experiment, raw=raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        files, checks = run_experiment(cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in files:
        print(f"wrote {path}")
    failed = [c for c in checks if not c.passed]
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {c.name}: {c.detail}")
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
