"""Pedestrian-dataset ingestion (ETH/UCY text format) and offline evaluation.

Input files are whitespace-separated lines ``frame ped x y`` with positions
in world meters; frames at stride 10 correspond to the 0.4 s prediction grid.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .metrics import aggregate_ci, displacement_errors
from .prediction import PredictionRequest


class DatasetParseError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetScene:
    name: str
    # (frame, ped) -> (x, y)
    observations: dict
    frame_stride: int = 10
    dt_pred: float = 0.4

    def frames(self):
        return sorted({f for f, _ in self.observations})

    def serialize(self) -> str:
        buf = io.StringIO()
        for (frame, ped) in sorted(self.observations):
            x, y = self.observations[(frame, ped)]
            buf.write(f"{frame} {ped} {x:.6f} {y:.6f}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class ObservationWindow:
    agent_ids: tuple
    observed: np.ndarray  # (n, h, 2)
    future: np.ndarray    # (n, T, 2)


def parse_dataset(path, name=None, frame_stride=10, dt_pred=0.4) -> DatasetScene:
    observations = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 4:
                raise DatasetParseError(
                    f"{path}:{lineno}: expected 4 fields `frame ped x y`, got {len(fields)}"
                )
            try:
                frame = int(float(fields[0]))
                ped = int(float(fields[1]))
                x, y = float(fields[2]), float(fields[3])
            except ValueError as exc:
                raise DatasetParseError(f"{path}:{lineno}: {exc}") from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise DatasetParseError(f"{path}:{lineno}: non-finite position")
            key = (frame, ped)
            if key in observations:
                raise DatasetParseError(f"{path}:{lineno}: duplicate (frame, ped) {key}")
            observations[key] = (x, y)
    scene_name = name if name is not None else str(path)
    return DatasetScene(scene_name, observations, frame_stride, dt_pred)


def make_windows(scene: DatasetScene, h=8, horizon=12, stride=1):
    """Sliding windows over the sampled frame grid; only agents present in
    every one of the h + horizon frames of a window are included."""
    if h < 1 or horizon < 1:
        raise ValueError("h and horizon must be >= 1")
    frames = scene.frames()
    # keep only frames on the sampling grid anchored at the first frame
    if not frames:
        return []
    base = frames[0]
    sampled = [f for f in frames if (f - base) % scene.frame_stride == 0]
    span = h + horizon
    windows = []
    for start in range(0, len(sampled) - span + 1, stride):
        window_frames = sampled[start:start + span]
        # frames must be consecutive on the grid
        if window_frames[-1] - window_frames[0] != (span - 1) * scene.frame_stride:
            continue
        peds = sorted({
            p for f, p in scene.observations if f == window_frames[0]
        })
        present = [
            p for p in peds
            if all((f, p) in scene.observations for f in window_frames)
        ]
        if not present:
            continue
        data = np.array([
            [scene.observations[(f, p)] for f in window_frames] for p in present
        ])
        windows.append(ObservationWindow(tuple(present), data[:, :h], data[:, h:]))
    return windows


def evaluate_offline(scene: DatasetScene, predictor, k=None, h=8, horizon=12,
                     stride=1, seed=0):
    """Run a predictor over every window; per-scene ADE/FDE plus a per-step
    error curve with 95% CIs. Deterministic given seed."""
    windows = make_windows(scene, h, horizon, stride)
    num_samples = k if k is not None else predictor.num_samples
    ades, fdes, curves = [], [], []
    failures = 0
    for i, window in enumerate(windows):
        request = PredictionRequest(window.observed, scene.dt_pred, horizon,
                                    num_samples, seed=seed + i)
        try:
            pset = predictor.predict(request)
        except Exception:
            failures += 1
            continue
        result = displacement_errors(window.future, pset)
        ades.append(result["ade"])
        fdes.append(result["fde"])
        curves.append(result["curve"].errors)
    if not ades:
        return {"scene": scene.name, "model": predictor.model_id, "k": num_samples,
                "num_windows": 0, "failures": failures, "ade": None, "fde": None,
                "curve": []}
    curve_matrix = np.stack(curves)
    curve = [
        {"step": t + 1, **aggregate_ci(curve_matrix[:, t])}
        for t in range(curve_matrix.shape[1])
    ]
    return {
        "scene": scene.name,
        "model": predictor.model_id,
        "k": num_samples,
        "num_windows": len(ades),
        "failures": failures,
        "ade": float(np.mean(ades)),
        "fde": float(np.mean(fdes)),
        "curve": curve,
    }
