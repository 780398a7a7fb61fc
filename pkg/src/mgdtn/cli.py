"""Command-line experiment runner.

    mg-dtn run <preset|--config PATH> [--out DIR] [--seed U64] [--set k=v]...
    mg-dtn list
    mg-dtn oracle [--n N] [--instances M] [--seed U64] [--out DIR]

Exit codes: 0 success, 1 usage/config error, 2 unconverged learning run
(unless --allow-unconverged), 3 internal invariant violation (an oracle
comparison failed).  MG_DTN_THREADS bounds worker parallelism.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ExperimentConfig, apply_overrides, parse_config
from .presets import PRESETS, preset_catalogue, preset_config
from .runner import EXIT_CONFIG, EXIT_OK, EXIT_UNCONVERGED, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mg-dtn",
        description="Minority-game DTN incentive experiments: solvers, learning, oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a preset or a config file")
    run_p.add_argument("preset", nargs="?", help=f"preset name ({', '.join(PRESETS)})")
    run_p.add_argument("--config", help="path to an experiment config file")
    run_p.add_argument("--out", default="out", help="output directory (default: ./out)")
    run_p.add_argument("--seed", type=int, help="override the experiment seed")
    run_p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one config scalar (repeatable)",
    )
    run_p.add_argument(
        "--allow-unconverged",
        action="store_true",
        help="exit 0 even when a learning run hits its round cap unconverged",
    )

    sub.add_parser("list", help="list presets")

    oracle_p = sub.add_parser("oracle", help="run the randomized oracle comparison suite")
    oracle_p.add_argument("--n", type=int, default=12, help="max population per instance")
    oracle_p.add_argument("--instances", type=int, default=50)
    oracle_p.add_argument("--seed", type=int, default=20260810)
    oracle_p.add_argument("--out", default="out")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    if args.preset and args.config:
        raise ConfigError("give either a preset name or --config, not both")
    if args.preset:
        try:
            config = preset_config(args.preset)
        except KeyError:
            raise ConfigError(
                f"unknown preset {args.preset!r}; run `mg-dtn list` for the catalogue"
            ) from None
    elif args.config:
        config = parse_config(args.config)
    else:
        raise ConfigError("nothing to run: give a preset name or --config PATH")
    apply_overrides(config, args.set)
    if args.seed is not None:
        config.sections.setdefault("experiment", {})["seed"] = str(args.seed)
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list":
        for name, desc in preset_catalogue():
            print(f"{name:14s} {desc}")
        return EXIT_OK

    if args.command == "oracle":
        config = ExperimentConfig(
            kind="oracle",
            sections={
                "experiment": {"kind": "oracle", "seed": str(args.seed)},
                "oracle": {"instances": str(args.instances), "n_max": str(args.n)},
            },
            name="oracle-cli",
        )
        result = run_experiment(config, args.out)
        print(
            f"oracle suite: {result.summary['instances']} instances, "
            f"{result.summary['failures']} failures, "
            f"max discrepancy {result.summary['max_discrepancy']:.3e}"
        )
        return result.status

    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"mg-dtn: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(config, args.out)
    except ConfigError as exc:
        print(f"mg-dtn: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in result.files:
        print(f"wrote {path}")
    for key, value in sorted(result.summary.items()):
        print(f"  {key} = {value}")
    if result.status == EXIT_UNCONVERGED and args.allow_unconverged:
        return EXIT_OK
    return result.status


if __name__ == "__main__":
    sys.exit(main())
