"""Normalize raw pedestrian recordings into the canonical dataset text format.

Canonical format (consumed downstream by the navigation package): one line
per observation, ``frame ped x y``, positions in world meters, sorted by
(frame, ped), coordinates printed with six decimals. Conversion is
idempotent: converting a canonical file again reproduces it byte for byte.
"""

from __future__ import annotations

import os

import numpy as np


class DatasetConversionError(ValueError):
    pass


def _apply_homography(hmat, px, py):
    vec = hmat @ np.array([px, py, 1.0])
    if vec[2] == 0.0:
        raise DatasetConversionError(f"homography maps ({px}, {py}) to infinity")
    return float(vec[0] / vec[2]), float(vec[1] / vec[2])


def load_homography(path) -> np.ndarray:
    hmat = np.loadtxt(path, dtype=float)
    if hmat.shape != (3, 3):
        raise DatasetConversionError(
            f"{path}: homography must be a 3x3 matrix, got shape {hmat.shape}"
        )
    return hmat


def convert_dataset(raw_path, out_path, layout="meters", homography=None) -> dict:
    """Convert a raw recording to the canonical text format.

    layout "meters": whitespace-separated ``frame ped x y`` already in world
    meters (covers the public ETH/UCY world-coordinate releases, which are
    tab-separated with float-typed ids). layout "pixels": ``frame ped px py``
    image coordinates, projected through the given 3x3 homography.

    Returns conversion stats; every input row produces exactly one output row.
    """
    if layout not in ("meters", "pixels"):
        raise DatasetConversionError(f"unknown layout {layout!r}")
    if layout == "pixels" and homography is None:
        raise DatasetConversionError("layout 'pixels' requires a homography")
    if homography is not None:
        homography = np.asarray(homography, dtype=float)
        if homography.shape != (3, 3):
            raise DatasetConversionError(
                f"homography must be 3x3, got shape {homography.shape}"
            )

    rows = {}
    with open(raw_path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 4:
                raise DatasetConversionError(
                    f"{raw_path}:{lineno}: expected 4 fields, got {len(fields)}"
                )
            try:
                frame = int(float(fields[0]))
                ped = int(float(fields[1]))
                x, y = float(fields[2]), float(fields[3])
            except ValueError as exc:
                raise DatasetConversionError(f"{raw_path}:{lineno}: {exc}") from None
            if layout == "pixels":
                x, y = _apply_homography(homography, x, y)
            if not (np.isfinite(x) and np.isfinite(y)):
                raise DatasetConversionError(f"{raw_path}:{lineno}: non-finite position")
            key = (frame, ped)
            if key in rows:
                raise DatasetConversionError(
                    f"{raw_path}:{lineno}: duplicate observation for (frame, ped) {key}"
                )
            rows[key] = (x, y)

    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    with open(out_path, "w") as f:
        for frame, ped in sorted(rows):
            x, y = rows[(frame, ped)]
            f.write(f"{frame} {ped} {x:.6f} {y:.6f}\n")

    frames = {f for f, _ in rows}
    peds = {p for _, p in rows}
    return {
        "rows": len(rows),
        "frames": len(frames),
        "peds": len(peds),
        "out_path": out_path,
    }
