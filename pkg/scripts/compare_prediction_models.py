#!/usr/bin/env python3
"""Score several predictors on identical simulated trials and emit the
per-step multistep error comparison (mean with 95% CI per horizon step).

Example:
    python scripts/compare_prediction_models.py --models cv,cvn,linreg \
        --trials 100 --out out/comparison.csv
"""

import argparse
import os

from crowdnav.harness import SCENARIO_IDS, compare_predictors


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", choices=SCENARIO_IDS, default="diagonal-swap-sim")
    parser.add_argument("--models", default="cv,cvn")
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--base-seed", type=int, default=0)
    parser.add_argument("--weights", default=None, help="manifest.json for sgan models")
    parser.add_argument("--out", default="out/comparison.csv")
    args = parser.parse_args()

    models = args.models.split(",")
    comparison = compare_predictors(args.scenario, models, args.trials,
                                    args.base_seed, weights_path=args.weights)

    rows = ["scenario,model,step,err_min,ci95"]
    for model_id, entry in comparison.items():
        print(f"{model_id} ({entry['num_calls']} calls): "
              + " ".join(f"{p['mean']:.3f}" for p in entry["curve"]))
        for step, point in enumerate(entry["curve"], start=1):
            rows.append(f"{args.scenario},{model_id},{step},"
                        f"{point['mean']:.6f},{point['ci95_halfwidth']:.6f}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w") as f:
        f.write("\n".join(rows) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
