"""Command-line entry point for the conversion toolchain.

Subcommands: convert-dataset, export-weights, emit-golden, init-checkpoint.
Exit codes: 0 success, 1 validation error.
"""

from __future__ import annotations

import argparse
import json
import sys


def _cmd_convert_dataset(args):
    from .datasets import convert_dataset, load_homography

    homography = load_homography(args.homography) if args.homography else None
    stats = convert_dataset(args.raw, args.out, layout=args.layout,
                            homography=homography)
    print(f"wrote {stats['out_path']}: {stats['rows']} rows, "
          f"{stats['peds']} pedestrians, {stats['frames']} frames")
    return 0


def _cmd_export_weights(args):
    from .weights import TensorNameMap, export_weights

    name_map = None
    if args.name_map:
        with open(args.name_map) as f:
            name_map = TensorNameMap.from_json(json.load(f))
    manifest = export_weights(args.checkpoint, args.out, name_map=name_map)
    print(f"wrote {manifest}")
    return 0


def _cmd_emit_golden(args):
    from .golden import emit_golden

    doc = emit_golden(args.checkpoint, args.out, tolerance=args.tolerance)
    print(f"wrote {args.out} ({len(doc['cases'])} cases)")
    return 0


def _cmd_init_checkpoint(args):
    from .model import make_reference_checkpoint

    path = make_reference_checkpoint(args.out, seed=args.seed)
    print(f"wrote {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sgan-converter")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert-dataset", help="normalize a raw recording")
    p.add_argument("--raw", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--layout", choices=["meters", "pixels"], default="meters")
    p.add_argument("--homography", default=None, help="3x3 matrix text file")
    p.set_defaults(func=_cmd_convert_dataset)

    p = sub.add_parser("export-weights", help="checkpoint -> portable format")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name-map", default=None, help="JSON list of map entries")
    p.set_defaults(func=_cmd_export_weights)

    p = sub.add_parser("emit-golden", help="write golden inference vectors")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=_cmd_emit_golden)

    p = sub.add_parser("init-checkpoint", help="seeded random reference checkpoint")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_init_checkpoint)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
