"""Command-line entry point.

Subcommands: simulate, evaluate-offline, train-toy, plot, golden-check.
Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np


def _cmd_simulate(args):
    from .harness import ExperimentConfig, run_benchmark

    with open(args.config) as f:
        doc = json.load(f)
    if args.seed is not None:
        doc["base_seed"] = args.seed
    config = ExperimentConfig.from_json(doc, out_dir=args.out)
    report = run_benchmark(config)
    print(f"wrote {config.out_dir}/report.json "
          f"({len(report['models'])} models, {config.trials} trials each)")
    return 0


def _cmd_evaluate_offline(args):
    from .datasets import evaluate_offline, parse_dataset
    from .prediction import make_predictor

    out_dir = args.out or "offline_out"
    os.makedirs(out_dir, exist_ok=True)
    scene = parse_dataset(args.dataset, name=args.scene_name)
    report_rows = ["scene,model,k,ade,fde"]
    curve_rows = ["scene,model,step,err_min,ci95"]
    for model_id in args.models.split(","):
        predictor = make_predictor(model_id, weights_path=args.weights)
        result = evaluate_offline(scene, predictor, k=args.k, seed=args.seed or 0)
        ade = f"{result['ade']:.6f}" if result["ade"] is not None else ""
        fde = f"{result['fde']:.6f}" if result["fde"] is not None else ""
        report_rows.append(f"{result['scene']},{model_id},{result['k']},{ade},{fde}")
        for point in result["curve"]:
            curve_rows.append(
                f"{result['scene']},{model_id},{point['step']},"
                f"{point['mean']:.6f},{point['ci95_halfwidth']:.6f}"
            )
        print(f"{result['scene']} {model_id}: ade={ade or 'n/a'} fde={fde or 'n/a'} "
              f"({result['num_windows']} windows, {result['failures']} failures)")
    with open(os.path.join(out_dir, "offline_report.csv"), "w") as f:
        f.write("\n".join(report_rows) + "\n")
    with open(os.path.join(out_dir, "offline_curves.csv"), "w") as f:
        f.write("\n".join(curve_rows) + "\n")
    return 0


def _cmd_train_toy(args):
    from .sgan import save_weights
    from .training import (TrainConfig, gen_straight_line_dataset,
                           gen_synthetic_dataset, trace_to_csv, train_toy)

    out_dir = args.out or "toy_weights"
    config = TrainConfig(epochs=args.epochs, seed=args.seed or 0)
    if args.corpus == "straight":
        dataset = gen_straight_line_dataset(args.scenes, seed=config.seed)
    else:
        dataset = gen_synthetic_dataset(args.scenes, seed=config.seed)
    weights, trace = train_toy(dataset, config)
    manifest = save_weights(weights, out_dir)
    with open(os.path.join(out_dir, "loss_trace.csv"), "w") as f:
        f.write(trace_to_csv(trace))
    first, last = trace[0], trace[-1]
    print(f"trained {config.epochs} epochs on {len(dataset)} samples; "
          f"variety {first['variety']:.4f} -> {last['variety']:.4f}")
    print(f"wrote {manifest}")
    return 0


def _cmd_plot(args):
    from .plots import emit_plots

    figures = emit_plots(args.report_dir)
    for fig in figures:
        print(f"wrote {fig}")
    return 0


def _cmd_golden_check(args):
    from .sgan import load_weights, sgan_forward

    with open(args.golden) as f:
        golden = json.load(f)
    weights = load_weights(args.weights)
    histories = np.array(golden["histories"], dtype=float)
    tol = float(golden.get("tolerance", 1e-4))
    worst = 0.0
    for case in golden["cases"]:
        z = np.array([case["z"]], dtype=float)
        out = sgan_forward(histories, weights, z, horizon=golden.get("T"))
        expected = np.array([case["expected"]], dtype=float)
        err = float(np.max(np.abs(out - expected)))
        worst = max(worst, err)
        status = "ok" if err <= tol else "FAIL"
        print(f"case {case.get('name', '?')}: max-abs {err:.3e} [{status}]")
    if worst > tol:
        print(f"golden check FAILED (worst {worst:.3e} > {tol})")
        return 2
    print(f"golden check passed ({len(golden['cases'])} cases, worst {worst:.3e})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="crowdnav")
    parser.add_argument("--seed", type=int, default=None, help="override base seed")
    parser.add_argument("--out", default=None, help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a benchmark experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("evaluate-offline", help="offline prediction evaluation on a dataset file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--scene-name", default=None)
    p.add_argument("--models", default="cv,linreg,constacc")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--weights", default=None)
    p.set_defaults(func=_cmd_evaluate_offline)

    p = sub.add_parser("train-toy", help="train the toy generative model")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--scenes", type=int, default=32)
    p.add_argument("--corpus", choices=["straight", "orca"], default="straight")
    p.set_defaults(func=_cmd_train_toy)

    p = sub.add_parser("plot", help="emit SVG figures from a report directory")
    p.add_argument("report_dir")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("golden-check", help="check inference against golden vectors")
    p.add_argument("--golden", required=True)
    p.add_argument("--weights", required=True, help="path to manifest.json")
    p.set_defaults(func=_cmd_golden_check)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
