"""Prediction-accuracy and navigation-performance metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .prediction import PredictionSet


@dataclass(frozen=True)
class PredictionErrorCurve:
    errors: np.ndarray  # (T,) per-step displacement errors
    reduction: str = "min"  # min-over-samples or mean-over-samples


@dataclass(frozen=True)
class TrialMetrics:
    safety: float  # meters; may be negative; +inf with zero humans
    time_to_goal: float
    status: str


def displacement_errors(ground_truth, predictions: PredictionSet, reduction="min",
                        per_agent=True):
    """ADE/FDE and per-step error curve against ground truth of shape (n, T, 2).

    Best-of-k is applied per agent by default (the benchmark convention);
    ``per_agent=False`` reduces over joint samples instead.
    """
    gt = np.asarray(ground_truth, dtype=float)
    t_common = min(gt.shape[1], predictions.horizon)
    gt = gt[:, :t_common]
    stacked = np.stack([s.futures[:, :t_common] for s in predictions.samples])  # (k, n, T, 2)
    if gt.shape[0] != stacked.shape[1]:
        raise ValueError(
            f"agent count mismatch: ground truth {gt.shape[0]}, prediction {stacked.shape[1]}"
        )
    err = np.linalg.norm(stacked - gt[None], axis=3)  # (k, n, T)

    reduce_fn = np.min if reduction == "min" else np.mean
    if per_agent:
        per_step = reduce_fn(err, axis=0)            # (n, T)
        ade = float(np.mean(reduce_fn(err.mean(axis=2), axis=0)))
        fde = float(np.mean(reduce_fn(err[:, :, -1], axis=0)))
    else:
        joint = err.mean(axis=1)                     # (k, T)
        best = reduce_fn(joint.mean(axis=1), axis=0)
        ade = float(best)
        fde = float(reduce_fn(joint[:, -1], axis=0))
        per_step = reduce_fn(err, axis=0)
    curve = PredictionErrorCurve(per_step.mean(axis=0), reduction)
    return {"ade": ade, "fde": fde, "curve": curve}


def trial_metrics(log, robot_radius=0.3, human_radius=0.3) -> TrialMetrics:
    """Safety (min clearance minus radii over the trial) and time to goal."""
    if not log.states:
        return TrialMetrics(math.inf, log.time_to_goal, log.status)
    safety = math.inf
    for w in log.states:
        for human in w.humans:
            d = float(np.hypot(*(w.robot.position - human.position)))
            safety = min(safety, d - robot_radius - human_radius)
    return TrialMetrics(safety, log.time_to_goal, log.status)


def aggregate_ci(values):
    """Mean and normal-approximation 95% CI half-width (1.96 * sd / sqrt(n))."""
    vals = sorted(float(v) for v in values)
    n = len(vals)
    if n == 0:
        raise ValueError("aggregate_ci needs at least one value")
    mean = math.fsum(vals) / n
    if n == 1:
        return {"mean": mean, "ci95_halfwidth": 0.0}
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return {"mean": mean, "ci95_halfwidth": 1.96 * math.sqrt(var) / math.sqrt(n)}


def multistep_errors_from_log(log, predictor_fn=None):
    """Per-call multistep prediction errors against the realized trajectories.

    For every logged PredictionSet whose full horizon lies within the trial,
    compares predicted human tracks to the positions later logged at the same
    times. Returns a dict with per-call ADE/FDE lists and the per-step error
    matrix (calls x T). ``predictor_fn(world, seed)``, when given, re-predicts
    from the logged states instead of using the stored sets (used to score a
    second model on the same trials).
    """
    by_step = {w.step: w for w in log.states}
    dt = log.dt
    ades, fdes, rows = [], [], []

    if predictor_fn is None:
        items = log.predictions
    else:
        items = [(step, None) for step, _ in log.predictions]

    for call_idx, (step, pset) in enumerate(items):
        if predictor_fn is not None:
            pset = predictor_fn(by_step[step], call_idx)
        if pset is None:
            continue
        stride = int(round(pset.dt / dt))
        horizon = pset.horizon
        gt_steps = [step + stride * (t + 1) for t in range(horizon)]
        if gt_steps[-1] not in by_step or any(s not in by_step for s in gt_steps):
            continue
        if not by_step[step].humans:
            continue
        start = 1 if pset.includes_robot else 0
        gt = np.stack([
            np.stack([by_step[s].humans[i].position for s in gt_steps])
            for i in range(len(by_step[step].humans))
        ])  # (n, T, 2)
        stacked = np.stack([s.futures[start:] for s in pset.samples])
        err = np.linalg.norm(stacked - gt[None], axis=3)  # (k, n, T)
        per_step = err.min(axis=0).mean(axis=0)           # best-of-k per agent, mean over agents
        rows.append(per_step)
        ades.append(float(per_step.mean()))
        fdes.append(float(per_step[-1]))

    return {
        "ade": ades,
        "fde": fdes,
        "per_step": np.array(rows) if rows else np.zeros((0, 0)),
        "num_calls": len(rows),
    }
