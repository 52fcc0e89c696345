"""Command line entry point: ``rmnklab {generate,features,run,explain,report,all}``.

Exit codes: 0 success, 2 configuration error, 3 missing or unreadable input.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .config import ConfigError, load_config

EXIT_OK, EXIT_CONFIG, EXIT_INPUT = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--seed", dest="master_seed", type=int, help="master seed")
    common.add_argument("--workers", type=int, help="parallel worker processes (env RMNK_WORKERS wins)")
    common.add_argument("--instances", dest="instances_per_combo", type=int, help="instances per parameter combination")
    common.add_argument("--runs", dest="runs_per_algorithm", type=int, help="runs per algorithm and instance")
    common.add_argument("--metric", choices=("reso", "hv"), help="performance metric to model")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rmnklab", description="rho-mnk landscape algorithm-footprint pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="generate instances and manifest.json")
    sub.add_parser("features", parents=[common], help="compute features.csv from the manifest")
    sub.add_parser("run", parents=[common], help="run all algorithms; write runs.csv and performance.csv")
    sub.add_parser("explain", parents=[common], help="model, attributions, clusters and footprints")
    sub.add_parser("report", parents=[common], help="render SVG figures and a summary")
    p_all = sub.add_parser("all", parents=[common], help="every stage in order")
    p_all.add_argument("--both-metrics", action="store_true", help="explain and report reso and hv")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in
                 ("output_dir", "master_seed", "workers", "instances_per_combo", "runs_per_algorithm", "metric")}
    try:
        cfg = load_config(args.config, overrides)
        cfg.resolved_workers()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "generate":
            pipeline.cmd_generate(cfg)
        elif args.command == "features":
            pipeline.cmd_features(cfg)
        elif args.command == "run":
            pipeline.cmd_run(cfg)
        elif args.command == "explain":
            print(pipeline.cmd_explain(cfg))
        elif args.command == "report":
            print(pipeline.cmd_report(cfg))
        else:
            pipeline.cmd_all(cfg, ["reso", "hv"] if args.both_metrics else None)
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
