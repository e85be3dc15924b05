#!/usr/bin/env python3
"""Offline ADE/FDE of the analytic predictors on pedestrian dataset files.

Expects text files `frame ped x y` (world meters, frame stride 10 = 0.4 s)
named <scene>.txt inside --dataset-dir; see README for how to obtain them.
"""

import argparse
import glob
import os

from crowdnav.datasets import evaluate_offline, parse_dataset
from crowdnav.prediction import make_predictor


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset-dir", default="data")
    parser.add_argument("--models", default="cv,linreg,constacc")
    parser.add_argument("--out", default="out/offline_tables.csv")
    args = parser.parse_args()

    paths = sorted(glob.glob(os.path.join(args.dataset_dir, "*.txt")))
    if not paths:
        raise SystemExit(f"no dataset files found in {args.dataset_dir}")

    rows = ["scene,model,k,ade,fde,num_windows"]
    for path in paths:
        scene_id = os.path.splitext(os.path.basename(path))[0]
        scene = parse_dataset(path, name=scene_id)
        for model_id in args.models.split(","):
            result = evaluate_offline(scene, make_predictor(model_id))
            ade = "" if result["ade"] is None else f"{result['ade']:.4f}"
            fde = "" if result["fde"] is None else f"{result['fde']:.4f}"
            print(f"{scene_id:>10} {model_id:>9}: ade {ade or 'n/a':>7} "
                  f"fde {fde or 'n/a':>7} ({result['num_windows']} windows)")
            rows.append(f"{scene_id},{model_id},{result['k']},{ade},{fde},"
                        f"{result['num_windows']}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w") as f:
        f.write("\n".join(rows) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
