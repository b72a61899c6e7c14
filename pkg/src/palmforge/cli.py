"""Command-line entry point.

palmforge normalize|canny|plan|assemble|render|augment|dataset
    --config <file> [--force] [--workers N] [--seed S]

Exit codes: 0 success, 2 config error, 3 stage failure.
"""

import argparse
import dataclasses
import json
import sys

from . import pipeline
from .config import load_config
from .errors import ConfigError, PalmforgeError

STAGES = ("normalize", "canny", "plan", "assemble", "render", "augment", "dataset")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="palmforge",
                                     description="Synthetic palmprint identity pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--force", action="store_true", help="recompute existing outputs")
        p.add_argument("--workers", type=int, default=None, help="parallel worker count")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, master_seed=args.seed)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError(f"workers must be >= 1, got {args.workers}")
            cfg = dataclasses.replace(cfg, workers=args.workers)
    except ConfigError as exc:
        print(f"palmforge: config error: {exc}", file=sys.stderr)
        return 2

    workers = cfg.workers
    try:
        if args.command == "normalize":
            rows = pipeline.stage_normalize(cfg, args.force)
            print(f"normalized {len(rows)} image(s)")
        elif args.command == "canny":
            rows = pipeline.stage_canny(cfg, args.force, workers)
            print(f"extracted {len(rows)} edge map(s)")
        elif args.command == "plan":
            p = pipeline.stage_plan(cfg, args.force)
            print(f"plan: clique {p.clique_size} -> {len(p)} combination(s)")
        elif args.command == "assemble":
            rows = pipeline.stage_assemble(cfg, args.force, workers)
            print(f"assembled {len(rows)} edge map(s)")
        elif args.command == "render":
            rows = pipeline.stage_render(cfg, args.force, workers)
            print(f"rendered {len(rows)} palm image(s)")
        elif args.command == "augment":
            rows = pipeline.stage_augment(cfg, args.force, workers)
            print(f"augmented {len(rows)} image(s)")
        else:
            summary = pipeline.cmd_dataset(cfg, args.force, workers)
            print(json.dumps(summary, indent=2, sort_keys=True))
    except ConfigError as exc:
        print(f"palmforge: config error: {exc}", file=sys.stderr)
        return 2
    except PalmforgeError as exc:
        print(f"palmforge: stage {args.command} failed: {exc}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
