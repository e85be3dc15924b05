"""Toy-scale adversarial training of the generative predictor.

Plain SGD on a tape-based gradient engine; the generator forward here mirrors
the numpy inference path in :mod:`crowdnav.sgan` (a test pins them equal).
Non-saturating generator loss, mixed with the best-of-k variety loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, concat, parameter, stack
from .sgan import (DEFAULT_HYPER, GenerativeModelWeights, discriminator_shapes,
                   generator_shapes)


class TrainingDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.02
    batch_size: int = 8
    epochs: int = 200
    k_variety: int = 3
    w_adversarial: float = 1.0
    w_variety: float = 1.0
    clip_norm: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if min(self.learning_rate, self.batch_size, self.epochs + 1, self.k_variety,
               self.clip_norm) <= 0:
            raise ValueError("training configuration values must be positive")


@dataclass(frozen=True)
class TrainSample:
    observed: np.ndarray  # (n, h, 2)
    future: np.ndarray    # (n, T, 2)

    def __post_init__(self):
        o, f = np.asarray(self.observed, float), np.asarray(self.future, float)
        if o.ndim != 3 or f.ndim != 3 or o.shape[0] != f.shape[0]:
            raise ValueError("observed/future shapes inconsistent")
        object.__setattr__(self, "observed", o)
        object.__setattr__(self, "future", f)


def variety_loss(ground_truth, samples) -> float:
    """Min over samples of the L2 norm of the flattened displacement to truth."""
    gt = np.asarray(ground_truth, dtype=float)
    best = math.inf
    for sample in samples:
        arr = np.asarray(getattr(sample, "futures", sample), dtype=float)
        if arr.shape != gt.shape:
            raise ValueError(f"sample shape {arr.shape} != ground truth {gt.shape}")
        best = min(best, float(np.linalg.norm((arr - gt).ravel())))
    if not samples:
        raise ValueError("need at least one sample")
    return best


def init_params(shapes, seed) -> dict:
    """Matrices uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)); biases zero."""
    rng = np.random.default_rng(np.uint64(seed))
    params = {}
    for name in sorted(shapes):
        shape = shapes[name]
        if len(shape) == 1:
            params[name] = parameter(np.zeros(shape))
        else:
            bound = 1.0 / math.sqrt(shape[-1])
            params[name] = parameter(rng.uniform(-bound, bound, size=shape))
    return params


def _gru_step_t(x, hidden, p, prefix):
    H = hidden.shape[1]
    gi = x @ p[f"{prefix}.w_ih"].T + p[f"{prefix}.b_ih"]
    gh = hidden @ p[f"{prefix}.w_hh"].T + p[f"{prefix}.b_hh"]
    r = (gi[:, :H] + gh[:, :H]).sigmoid()
    z = (gi[:, H:2 * H] + gh[:, H:2 * H]).sigmoid()
    n = (gi[:, 2 * H:] + r * gh[:, 2 * H:]).tanh()
    return (1.0 - z) * n + z * hidden


def _pool_t(hidden, positions, p, pool_dim):
    n = positions.shape[0]
    if n == 1:
        return Tensor(np.zeros((1, pool_dim)))
    rows = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        rel = Tensor(positions[others] - positions[i])
        feats = concat([rel, hidden[others]], axis=1)
        out = (feats @ p["pool.fc1.w"].T + p["pool.fc1.b"]).relu()
        out = out @ p["pool.fc2.w"].T + p["pool.fc2.b"]
        rows.append(out.max_over(axis=0))
    return stack(rows, axis=0)


def generator_forward(params, observed, z, horizon, hyper):
    """Tape version of the generator; returns positions Tensor (n, T, 2)."""
    observed = np.asarray(observed, dtype=float)
    n = observed.shape[0]
    displacements = np.diff(observed, axis=1)
    hidden = Tensor(np.zeros((n, hyper["enc_hidden"])))
    for step in range(displacements.shape[1]):
        x = Tensor(displacements[:, step]) @ params["enc.embed.w"].T + params["enc.embed.b"]
        hidden = _gru_step_t(x, hidden, params, "enc.gru")

    pooled = _pool_t(hidden, observed[:, -1], params, hyper["pool_dim"])
    z_rows = Tensor(np.tile(np.asarray(z, dtype=float), (n, 1)))
    cond = concat([hidden, pooled, z_rows], axis=1)
    dec_hidden = cond @ params["dec.init.w"].T + params["dec.init.b"]

    prev = Tensor(displacements[:, -1])
    origin = Tensor(observed[:, -1])
    positions = []
    running = origin
    for _ in range(horizon):
        x = prev @ params["dec.embed.w"].T + params["dec.embed.b"]
        dec_hidden = _gru_step_t(x, dec_hidden, params, "dec.gru")
        prev = dec_hidden @ params["dec.head.w"].T + params["dec.head.b"]
        running = running + prev
        positions.append(running)
    return stack(positions, axis=1)  # (n, T, 2)


def discriminator_forward(params, displacements, hyper):
    """Logits Tensor (n, 1) over per-agent displacement sequences (n, L, 2)."""
    n = displacements.shape[0]
    hidden = Tensor(np.zeros((n, hyper["disc_hidden"])))
    for step in range(displacements.shape[1]):
        x = displacements[:, step, :] @ params["disc.embed.w"].T + params["disc.embed.b"]
        hidden = _gru_step_t(x, hidden, params, "disc.gru")
    return hidden @ params["disc.head.w"].T + params["disc.head.b"]


def _fake_displacements(params, sample, z, hyper):
    """Displacement sequence obs + generated, keeping the generator graph."""
    positions = generator_forward(params, sample.observed, z, sample.future.shape[1], hyper)
    obs_disp = np.diff(sample.observed, axis=1)
    origin = Tensor(sample.observed[:, -1][:, None, :])
    prev = concat([origin, positions[:, :-1, :]], axis=1)
    gen_disp = positions - prev
    return concat([Tensor(obs_disp), gen_disp], axis=1), positions


def _variety_loss_t(params, sample, zs, hyper):
    losses = []
    for z in zs:
        positions = generator_forward(params, sample.observed, z, sample.future.shape[1], hyper)
        diff = positions - Tensor(sample.future)
        losses.append((diff * diff).sum().sqrt())
    best = min(range(len(losses)), key=lambda i: float(losses[i].data))
    return losses[best]


def gan_losses(batch, gen_params, disc_params, config: TrainConfig, hyper, rng):
    """Discriminator and generator losses over a batch of TrainSamples.

    loss_D = mean softplus(-logit_real) + mean softplus(logit_fake)
    loss_G = w_adv * mean softplus(-logit_fake) + w_variety * variety
    Raises TrainingDivergenceError (with batch index) on non-finite loss.
    """
    d_z = hyper["d_z"]
    real_terms, fake_terms, adv_terms, variety_terms = [], [], [], []
    for idx, sample in enumerate(batch):
        real_disp = np.diff(np.concatenate([sample.observed, sample.future], axis=1), axis=1)
        logit_real = discriminator_forward(disc_params, Tensor(real_disp), hyper)
        real_terms.append((-logit_real).softplus().mean())

        z_d = rng.standard_normal(d_z)
        fake_disp, _ = _fake_displacements(gen_params, sample, z_d, hyper)
        logit_fake = discriminator_forward(disc_params, fake_disp, hyper)
        fake_terms.append(logit_fake.softplus().mean())

        z_g = rng.standard_normal(d_z)
        fake_disp_g, _ = _fake_displacements(gen_params, sample, z_g, hyper)
        logit_fake_g = discriminator_forward(disc_params, fake_disp_g, hyper)
        adv_terms.append((-logit_fake_g).softplus().mean())

        zs = [rng.standard_normal(d_z) for _ in range(config.k_variety)]
        variety_terms.append(_variety_loss_t(gen_params, sample, zs, hyper))

        for name, value in (("loss_D(real)", real_terms[-1]), ("loss_D(fake)", fake_terms[-1]),
                            ("loss_G(adv)", adv_terms[-1]), ("variety", variety_terms[-1])):
            if not np.isfinite(value.data):
                raise TrainingDivergenceError(f"non-finite {name} at batch index {idx}")

    def batch_mean(terms):
        total = terms[0]
        for t in terms[1:]:
            total = total + t
        return total * (1.0 / len(terms))

    loss_d = batch_mean(real_terms) + batch_mean(fake_terms)
    variety = batch_mean(variety_terms)
    loss_g = config.w_adversarial * batch_mean(adv_terms) + config.w_variety * variety
    return loss_d, loss_g, float(variety.data)


def _sgd_step(params, learning_rate, clip_norm):
    total_sq = 0.0
    for p in params.values():
        if p.grad is not None:
            total_sq += float((p.grad ** 2).sum())
    scale = 1.0
    norm = math.sqrt(total_sq)
    if norm > clip_norm:
        scale = clip_norm / norm
    for p in params.values():
        if p.grad is not None:
            p.data -= learning_rate * scale * p.grad
        p.grad = None


def _zero_grads(params):
    for p in params.values():
        p.grad = None


def params_to_weights(gen_params, disc_params, hyper) -> GenerativeModelWeights:
    tensors = {name: np.array(p.data) for name, p in gen_params.items()}
    if disc_params is not None:
        tensors.update({name: np.array(p.data) for name, p in disc_params.items()})
    return GenerativeModelWeights(tensors, dict(hyper))


def train_toy(dataset, config: TrainConfig, hyper=None):
    """Alternating SGD on discriminator and generator.

    Returns (GenerativeModelWeights, per-epoch trace list of dicts with
    keys epoch/loss_d/loss_g/variety). Deterministic given config.seed.
    """
    if not dataset:
        raise ValueError("dataset must be nonempty")
    hyper = dict(DEFAULT_HYPER if hyper is None else hyper)
    rng = np.random.default_rng(np.uint64(config.seed))
    gen_params = init_params(generator_shapes(hyper), config.seed)
    disc_params = init_params(discriminator_shapes(hyper), config.seed + 1)

    trace = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(dataset))
        epoch_d, epoch_g, epoch_v, batches = 0.0, 0.0, 0.0, 0
        for start in range(0, len(dataset), config.batch_size):
            batch = [dataset[i] for i in order[start:start + config.batch_size]]
            try:
                loss_d, loss_g, variety = gan_losses(
                    batch, gen_params, disc_params, config, hyper, rng
                )
            except TrainingDivergenceError as exc:
                raise TrainingDivergenceError(f"epoch {epoch}: {exc}") from exc
            loss_d.backward()
            _zero_grads(gen_params)  # only the discriminator updates on loss_D
            _sgd_step(disc_params, config.learning_rate, config.clip_norm)

            loss_g.backward()
            _zero_grads(disc_params)
            _sgd_step(gen_params, config.learning_rate, config.clip_norm)

            epoch_d += float(loss_d.data)
            epoch_g += float(loss_g.data)
            epoch_v += variety
            batches += 1
        trace.append({
            "epoch": epoch,
            "loss_d": epoch_d / batches,
            "loss_g": epoch_g / batches,
            "variety": epoch_v / batches,
        })
    return params_to_weights(gen_params, disc_params, hyper), trace


def trace_to_csv(trace) -> str:
    lines = ["epoch,loss_d,loss_g,variety"]
    for row in trace:
        lines.append(f"{row['epoch']},{row['loss_d']:.6f},{row['loss_g']:.6f},{row['variety']:.6f}")
    return "\n".join(lines) + "\n"


def gen_straight_line_dataset(num_samples, hyper=None, seed=0, num_agents=2):
    """Constant-velocity walkers: the easiest corpus the generator can fit."""
    hyper = dict(DEFAULT_HYPER if hyper is None else hyper)
    rng = np.random.default_rng(np.uint64(seed))
    h, T, dt = hyper["h"], hyper["T"], hyper["dt_pred"]
    samples = []
    for _ in range(num_samples):
        starts = rng.uniform(0.0, 3.6, size=(num_agents, 2))
        speeds = rng.uniform(0.3, 1.0, size=num_agents)
        angles = rng.uniform(0.0, 2 * math.pi, size=num_agents)
        vel = np.stack([speeds * np.cos(angles), speeds * np.sin(angles)], axis=1)
        times = np.arange(h + T)[None, :, None] * dt
        track = starts[:, None, :] + vel[:, None, :] * times
        samples.append(TrainSample(track[:, :h], track[:, h:]))
    return samples


def gen_synthetic_dataset(num_scenes, hyper=None, seed=0, num_agents=3,
                          scene_steps=None, window_stride=1):
    """Sliding h+T windows (on the prediction grid) over all-ORCA scenes with
    randomized starts and goals in the benchmark workspace."""
    from .world import (AgentSpec, Behavior, Scenario, SimConfig, initial_world,
                        step_world, vec2)

    hyper = dict(DEFAULT_HYPER if hyper is None else hyper)
    rng = np.random.default_rng(np.uint64(seed))
    h, T, dt_pred = hyper["h"], hyper["T"], hyper["dt_pred"]
    span = h + T
    samples = []
    for scene_idx in range(num_scenes):
        corners = rng.uniform([0.2, 0.2], [3.4, 4.3], size=(num_agents, 2, 2))
        agents = tuple(
            AgentSpec(vec2(*c[0]), vec2(*c[1]), Behavior.ORCA,
                      preferred_speed=float(rng.uniform(0.5, 1.0)))
            for c in corners
        )
        scenario = Scenario(
            name=f"synthetic-{scene_idx}", bounds=(0.0, 0.0, 3.6, 4.5),
            robot_start=vec2(0.0, 0.0), robot_goal=vec2(0.0, 0.0),
            agents=agents, max_duration=1e9,
        )
        config = SimConfig(dt=0.1, seed=int(rng.integers(0, 2**63)))
        stride = int(round(dt_pred / config.dt))
        steps = scene_steps if scene_steps is not None else stride * (span + 4)
        world = initial_world(scenario, config)
        tracks = [np.array([a.position for a in world.humans])]
        for _ in range(steps):
            world = step_world(world, np.zeros(2), scenario, config)
            tracks.append(np.array([a.position for a in world.humans]))
        grid = np.stack(tracks[::stride], axis=1)  # (n, steps/stride + 1, 2)
        for start in range(0, grid.shape[1] - span + 1, window_stride):
            window = grid[:, start:start + span]
            samples.append(TrainSample(window[:, :h], window[:, h:]))
    return samples
