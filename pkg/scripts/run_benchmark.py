#!/usr/bin/env python3
"""Run the navigation benchmark for one scenario and a set of predictors,
then regenerate the figures from the emitted CSVs.

Example:
    python scripts/run_benchmark.py --scenario cooperative \
        --models cv,cvn,linreg --trials 20 --out out/cooperative
"""

import argparse

from crowdnav.harness import MODEL_IDS, SCENARIO_IDS, ExperimentConfig, run_benchmark
from crowdnav.plots import emit_plots


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", choices=SCENARIO_IDS, default="cooperative")
    parser.add_argument("--models", default="cv,cvn")
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--base-seed", type=int, default=0)
    parser.add_argument("--weights", default="", help="manifest.json for sgan models")
    parser.add_argument("--out", default="out/benchmark")
    args = parser.parse_args()

    models = tuple(args.models.split(","))
    unknown = [m for m in models if m not in MODEL_IDS]
    if unknown:
        parser.error(f"unknown models: {unknown}")

    config = ExperimentConfig(
        scenario=args.scenario, models=models, trials=args.trials,
        base_seed=args.base_seed, weights_path=args.weights, out_dir=args.out,
    )
    report = run_benchmark(config)
    for model_id, entry in report["models"].items():
        time_ci = entry["time_to_goal"]
        line = f"{model_id}: time-to-goal {time_ci['mean']:.2f} ± {time_ci['ci95_halfwidth']:.2f} s"
        if "safety" in entry:
            s = entry["safety"]
            line += f", safety {s['mean']:.3f} ± {s['ci95_halfwidth']:.3f} m"
        print(line)
    for figure in emit_plots(args.out):
        print(f"wrote {figure}")


if __name__ == "__main__":
    main()
