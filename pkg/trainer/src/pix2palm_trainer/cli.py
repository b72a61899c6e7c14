"""Command-line entry points.

  pix2palm train --data <dir> --out <artifact> [--config <file>]
  pix2palm serve --model <artifact> --in <dir> --out <dir>
                 [--poll-ms N] [--idle-timeout-s S] [--once]

The train config file is a JSON object with TrainerConfig fields; unknown
keys are rejected.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .serve import serve
from .training import TrainerConfig, TrainingDiverged, train, write_curves


def load_trainer_config(path) -> TrainerConfig:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    known = {f.name for f in dataclasses.fields(TrainerConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"{path}: unknown config key(s): {', '.join(sorted(unknown))}")
    return TrainerConfig(**data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pix2palm",
                                     description="Edge-to-palm generator training and serving")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a generator on paired PNGs")
    p_train.add_argument("--data", required=True, help="directory of {stem}_edge.png / {stem}.png pairs")
    p_train.add_argument("--palms", default=None,
                         help="optional separate palm-image root (matching relative paths)")
    p_train.add_argument("--out", required=True, help="artifact output path")
    p_train.add_argument("--config", default=None, help="TrainerConfig JSON")

    p_serve = sub.add_parser("serve", help="answer render-protocol batches")
    p_serve.add_argument("--model", required=True)
    p_serve.add_argument("--in", dest="input_dir", required=True)
    p_serve.add_argument("--out", dest="output_dir", required=True)
    p_serve.add_argument("--poll-ms", type=int, default=50)
    p_serve.add_argument("--idle-timeout-s", type=float, default=30.0)
    p_serve.add_argument("--once", action="store_true", help="exit after the first batch")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        try:
            cfg = load_trainer_config(args.config) if args.config else TrainerConfig()
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            print(f"pix2palm: config error: {exc}", file=sys.stderr)
            return 2
        try:
            result = train(args.data, cfg, args.out, palms_root=args.palms)
        except TrainingDiverged as exc:
            print(f"pix2palm: training aborted: {exc}", file=sys.stderr)
            return 3
        curves_path = Path(args.out).with_suffix(".curves.jsonl")
        write_curves(result["curves"], curves_path)
        last = result["curves"][-1] if result["curves"] else {}
        print(f"trained {result['steps']} step(s); artifact {result['artifact']}; "
              f"final losses {json.dumps(last)}; curves {curves_path}")
        return 0

    served = serve(args.model, args.input_dir, args.output_dir,
                   poll_interval_ms=args.poll_ms,
                   idle_timeout_s=args.idle_timeout_s, once=args.once)
    print(f"served {served} request(s)")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
