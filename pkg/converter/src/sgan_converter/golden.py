"""Golden inference vectors from the torch reference forward pass.

The emitted JSON (histories, horizon, tolerance, named z cases with
expected positions) is consumed by the navigation CLI's ``golden-check``
subcommand, which reruns its own inference on the exported portable
weights and compares to these expectations.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .model import load_checkpoint


def default_histories(h=8) -> np.ndarray:
    """Deterministic 3-agent crossing scene: h observed positions each,
    on the 0.4 s grid, with distinct headings and speeds."""
    t = np.arange(h, dtype=float)
    a = np.stack([0.30 * t, 0.5 + 0.05 * t], axis=1)
    b = np.stack([3.0 - 0.25 * t, 0.8 + 0.20 * t], axis=1)
    c = np.stack([1.5 + 0.10 * t, 3.5 - 0.30 * t], axis=1)
    return np.stack([a, b, c])


def golden_cases(d_z) -> list:
    """Named latent vectors; always includes the all-zeros case."""
    mixed = np.array([((-1.0) ** i) * 0.5 * (i + 1) for i in range(d_z)])
    return [
        ("z_zeros", np.zeros(d_z)),
        ("z_ones", np.ones(d_z)),
        ("z_mixed", mixed),
    ]


def emit_golden(checkpoint_path, out_path, tolerance=1e-4, histories=None) -> dict:
    """Run the reference forward on the fixed scene for each latent case and
    write the golden JSON. Returns the document."""
    model, config = load_checkpoint(checkpoint_path)
    if histories is None:
        histories = default_histories(config["h"])
    histories = np.asarray(histories, dtype=float)

    cases = []
    for name, z in golden_cases(config["d_z"]):
        out = model(histories, z[None, :]).numpy()
        cases.append({
            "name": name,
            "z": z.tolist(),
            "expected": out[0].tolist(),
        })

    doc = {
        "histories": histories.tolist(),
        "T": config["T"],
        "tolerance": tolerance,
        "cases": cases,
    }
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    with open(out_path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    return doc
