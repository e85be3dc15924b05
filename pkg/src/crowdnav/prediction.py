"""Trajectory predictors: analytic baselines and generative social-pooling inference.

All predictors map joint agent position histories to k sampled joint futures
on the prediction-time grid (default 0.4 s). Deterministic under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class InsufficientHistoryError(ValueError):
    pass


@dataclass(frozen=True)
class PredictionRequest:
    histories: np.ndarray   # (n, h, 2) positions on the dt_pred grid
    dt_pred: float
    horizon: int            # T
    num_samples: int        # k
    seed: int = 0
    padded: bool = False    # True if short histories were back-filled

    def __post_init__(self):
        h = np.asarray(self.histories, dtype=float)
        if h.ndim != 3 or h.shape[2] != 2:
            raise ValueError(f"histories must be (n, h, 2), got {h.shape}")
        if h.shape[1] < 2:
            raise InsufficientHistoryError("need at least 2 history points")
        if self.horizon < 1 or self.num_samples < 1:
            raise ValueError("horizon and num_samples must be >= 1")
        object.__setattr__(self, "histories", h)

    @property
    def n(self) -> int:
        return self.histories.shape[0]

    @property
    def h(self) -> int:
        return self.histories.shape[1]


@dataclass(frozen=True)
class TrajectorySample:
    futures: np.ndarray  # (n, T, 2)

    def __post_init__(self):
        f = np.asarray(self.futures, dtype=float)
        if f.ndim != 3 or f.shape[2] != 2:
            raise ValueError(f"futures must be (n, T, 2), got {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("non-finite prediction")
        object.__setattr__(self, "futures", f)


@dataclass(frozen=True)
class PredictionSet:
    samples: tuple            # of TrajectorySample, length k
    model_id: str
    dt: float                 # grid spacing of the sample trajectories
    origins: np.ndarray       # (n, 2) last observed positions
    includes_robot: bool = False  # True if track 0 is the robot (joint models)
    padded: bool = False

    def __post_init__(self):
        shapes = {s.futures.shape for s in self.samples}
        if len(shapes) != 1:
            raise ValueError(f"samples disagree on shape: {shapes}")

    @property
    def k(self) -> int:
        return len(self.samples)

    @property
    def n(self) -> int:
        return self.samples[0].futures.shape[0]

    @property
    def horizon(self) -> int:
        return self.samples[0].futures.shape[1]


def build_request(world, h, dt_pred, horizon, k, seed, include_robot, robot_only=False):
    """Sample agent histories from a WorldState onto the prediction grid.

    Histories shorter than h are padded backward with the earliest observed
    position (stationary-prefix assumption).
    """
    stride = int(round(dt_pred / world.dt))
    if stride < 1 or abs(stride * world.dt - dt_pred) > 1e-9:
        raise ValueError(f"dt_pred {dt_pred} is not a multiple of sim dt {world.dt}")
    if robot_only:
        hists = world.histories[:1]
    elif include_robot:
        hists = world.histories
    else:
        hists = world.histories[1:]

    out = np.empty((len(hists), h, 2))
    padded = False
    for i, hist in enumerate(hists):
        pts = [np.array(rec[1:]) for rec in hist[::-1][::stride]][::-1]  # newest-aligned
        if len(pts) < h:
            padded = True
            pts = [pts[0]] * (h - len(pts)) + pts
        out[i] = np.stack(pts[-h:])
    return PredictionRequest(out, dt_pred, horizon, k, seed, padded)


def _cv_velocities(request: PredictionRequest) -> np.ndarray:
    return (request.histories[:, -1] - request.histories[:, -2]) / request.dt_pred


def _extrapolate(origins, velocities, horizon, dt):
    steps = np.arange(1, horizon + 1)[None, :, None]
    return origins[:, None, :] + velocities[:, None, :] * steps * dt


def predict_cv(request: PredictionRequest) -> PredictionSet:
    """Constant-velocity extrapolation of the last observed displacement."""
    origins = request.histories[:, -1]
    futures = _extrapolate(origins, _cv_velocities(request), request.horizon, request.dt_pred)
    return PredictionSet((TrajectorySample(futures),), "cv", request.dt_pred, origins,
                         padded=request.padded)


def predict_cvn(request: PredictionRequest, sigma_theta: float = 0.1) -> PredictionSet:
    """CV with heading noise: per sample, each agent's velocity is rotated by
    an angle drawn from Normal(0, sigma_theta^2)."""
    origins = request.histories[:, -1]
    velocities = _cv_velocities(request)
    rng = np.random.default_rng(np.uint64(request.seed))
    samples = []
    for _ in range(request.num_samples):
        angles = rng.normal(0.0, sigma_theta, size=request.n) if sigma_theta > 0 \
            else np.zeros(request.n)
        c, s = np.cos(angles), np.sin(angles)
        rotated = np.stack([c * velocities[:, 0] - s * velocities[:, 1],
                            s * velocities[:, 0] + c * velocities[:, 1]], axis=1)
        samples.append(TrajectorySample(_extrapolate(origins, rotated, request.horizon, request.dt_pred)))
    return PredictionSet(tuple(samples), "cvn", request.dt_pred, origins, padded=request.padded)


def predict_const_acc(request: PredictionRequest) -> PredictionSet:
    """Constant-acceleration propagation from finite differences on the last
    three observed points."""
    if request.h < 3:
        raise InsufficientHistoryError("constant-acceleration needs 3 history points")
    dt = request.dt_pred
    p = request.histories
    v1 = (p[:, -2] - p[:, -3]) / dt
    v = (p[:, -1] - p[:, -2]) / dt
    a = (v - v1) / dt
    futures = np.empty((request.n, request.horizon, 2))
    pos, vel = p[:, -1].copy(), v.copy()
    for t in range(request.horizon):
        pos = pos + vel * dt + 0.5 * a * dt * dt
        vel = vel + a * dt
        futures[:, t] = pos
    return PredictionSet((TrajectorySample(futures),), "constacc", dt, p[:, -1],
                         padded=request.padded)


def predict_linreg(request: PredictionRequest) -> PredictionSet:
    """Per-coordinate least-squares line over the observed window, evaluated
    at future times."""
    h, dt = request.h, request.dt_pred
    times = np.arange(h) * dt
    design = np.stack([np.ones(h), times], axis=1)
    future_times = (h - 1) * dt + np.arange(1, request.horizon + 1) * dt
    future_design = np.stack([np.ones(request.horizon), future_times], axis=1)
    futures = np.empty((request.n, request.horizon, 2))
    for i in range(request.n):
        coef, *_ = np.linalg.lstsq(design, request.histories[i], rcond=None)
        futures[i] = future_design @ coef
    return PredictionSet((TrajectorySample(futures),), "linreg", dt, request.histories[:, -1],
                         padded=request.padded)


def resample_prediction(pset: PredictionSet, dt_ctrl: float) -> PredictionSet:
    """Linearly interpolate each future polyline onto the controller grid,
    prepending the last observed position as the t=0 anchor."""
    if dt_ctrl > pset.dt + 1e-12:
        raise ValueError("controller timestep must not exceed the prediction timestep")
    horizon_s = pset.horizon * pset.dt
    n_out = int(round(horizon_s / dt_ctrl))
    src_times = np.arange(0, pset.horizon + 1) * pset.dt
    dst_times = np.arange(0, n_out + 1) * dt_ctrl
    samples = []
    for sample in pset.samples:
        with_anchor = np.concatenate([pset.origins[:, None, :], sample.futures], axis=1)
        out = np.empty((pset.n, n_out + 1, 2))
        for i in range(pset.n):
            out[i, :, 0] = np.interp(dst_times, src_times, with_anchor[i, :, 0])
            out[i, :, 1] = np.interp(dst_times, src_times, with_anchor[i, :, 1])
        samples.append(TrajectorySample(out))
    return replace(pset, samples=tuple(samples), dt=dt_ctrl)


class Predictor:
    """Callable predictor with the metadata run_trial needs."""

    def __init__(self, model_id, fn, num_samples=1, joint=False,
                 history_len=8, dt_pred=0.4, horizon=12):
        self.model_id = model_id
        self._fn = fn
        self.num_samples = num_samples
        self.joint = joint
        self.history_len = history_len
        self.dt_pred = dt_pred
        self.horizon = horizon

    def predict(self, request: PredictionRequest) -> PredictionSet:
        pset = self._fn(request)
        if self.joint:
            pset = replace(pset, includes_robot=True)
        return replace(pset, model_id=self.model_id)


def make_predictor(model_id: str, weights_path=None, sigma_theta=0.1,
                   history_len=8, dt_pred=0.4, horizon=12) -> Predictor:
    """Predictor registry for the benchmark model ids."""
    if model_id == "cv":
        return Predictor("cv", predict_cv, 1, False, history_len, dt_pred, horizon)
    if model_id == "cvn":
        return Predictor("cvn", lambda r: predict_cvn(r, sigma_theta), 20, False,
                         history_len, dt_pred, horizon)
    if model_id == "constacc":
        return Predictor("constacc", predict_const_acc, 1, False, history_len, dt_pred, horizon)
    if model_id == "linreg":
        return Predictor("linreg", predict_linreg, 1, False, history_len, dt_pred, horizon)
    if model_id in ("sgan-1", "sgan-20"):
        from .sgan import load_weights, predict_sgan
        if weights_path is None:
            raise ValueError(f"model {model_id} requires a weight file")
        weights = load_weights(weights_path)
        k = 1 if model_id == "sgan-1" else 20
        return Predictor(model_id, lambda r: predict_sgan(r, weights), k, True,
                         weights.hyper.get("h", history_len),
                         weights.hyper.get("dt_pred", dt_pred),
                         weights.hyper.get("T", horizon))
    raise ValueError(f"unknown model id: {model_id}")
