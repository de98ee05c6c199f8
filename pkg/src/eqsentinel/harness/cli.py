"""Command-line entry point.

    eqsentinel <subcommand> --config <path> [--seed N] [--out DIR] [--assert]

Exit codes: 0 on success, 2 when --assert is given and an acceptance
statistic fails, 1 on errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from ..errors import ConfigError
from .config import config_from_mapping, game_from_mapping, load_config, strategy_from_mapping
from .csvio import format_value
from .experiments import EXPERIMENTS, replace_config, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eqsentinel",
        description="Sequential equilibrium-deviation monitors: experiment runner",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, (config_cls, _) in sorted(EXPERIMENTS.items()):
        defaults = ", ".join(
            f"{f.name}={getattr(config_cls(), f.name)}"
            for f in dataclasses.fields(config_cls)
        )
        p = sub.add_parser(name, help=f"defaults: {defaults}")
        p.add_argument("--config", type=Path, help="flat key=value config file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument(
            "--assert",
            dest="assert_checks",
            action="store_true",
            help="exit 2 if any acceptance statistic fails",
        )
        p.add_argument(
            "--workers", type=int, help="parallel workers over runs (where supported)"
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    name = args.experiment
    config_cls, _ = EXPERIMENTS[name]
    try:
        mapping = load_config(args.config) if args.config else {}
        declared = mapping.get("experiment")
        if declared is not None and declared != name:
            raise ConfigError(
                f"config declares experiment {declared!r}, command was {name!r}"
            )
        config = config_from_mapping(config_cls, mapping, ignore=("experiment",))
        field_names = {f.name for f in dataclasses.fields(config_cls)}
        if args.seed is not None and "seed" in field_names:
            config = replace_config(config, seed=args.seed)
        if args.workers is not None and "workers" in field_names:
            config = replace_config(config, workers=args.workers)
        out_dir = args.out or Path("results") / name
        kwargs = {}
        if name in ("nf-fwer-null", "nf-detect"):
            game = game_from_mapping(mapping)
            strategy = strategy_from_mapping(mapping)
            if game is not None:
                kwargs["game"] = game
            if strategy is not None:
                kwargs["strategy"] = strategy
        result = run_experiment(name, config, out_dir, **kwargs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for key, value in result.summary.items():
        print(f"{key} = {format_value(value)}")
    for key, ok in result.checks.items():
        print(f"check {key}: {'pass' if ok else 'FAIL'}")
    print(f"artifacts: {', '.join(str(p) for p in result.artifacts)}")
    if args.assert_checks and not result.passed:
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
