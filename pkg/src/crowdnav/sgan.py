"""Generative social-pooling predictor: portable weight format and inference.

The generator encodes each agent's displacement sequence with a GRU, pools
neighbor embeddings once (max over an MLP of relative position + hidden),
and decodes future displacements conditioned on (hidden, pooled, z).

Weight format: ``manifest.json`` listing {name, shape, offset, dtype=f32}
per tensor plus hyperparameters, alongside ``weights.bin`` holding
concatenated little-endian float32 values, row-major, at the declared
byte offsets.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .prediction import PredictionRequest, PredictionSet, TrajectorySample


class WeightFormatError(ValueError):
    pass


class MissingTensorError(WeightFormatError):
    pass


class ShapeMismatchError(WeightFormatError):
    pass


class TruncatedBinaryError(WeightFormatError):
    pass


class ModelDivergenceError(RuntimeError):
    pass


DEFAULT_HYPER = {
    "embed_dim": 16,
    "enc_hidden": 16,
    "dec_hidden": 16,
    "pool_dim": 16,
    "d_z": 4,
    "disc_hidden": 16,
    "dt_pred": 0.4,
    "h": 8,
    "T": 12,
}


def generator_shapes(hyper) -> dict:
    e = hyper["embed_dim"]
    h = hyper["enc_hidden"]
    hd = hyper["dec_hidden"]
    p = hyper["pool_dim"]
    dz = hyper["d_z"]
    return {
        "enc.embed.w": (e, 2),
        "enc.embed.b": (e,),
        "enc.gru.w_ih": (3 * h, e),
        "enc.gru.w_hh": (3 * h, h),
        "enc.gru.b_ih": (3 * h,),
        "enc.gru.b_hh": (3 * h,),
        "pool.fc1.w": (p, h + 2),
        "pool.fc1.b": (p,),
        "pool.fc2.w": (p, p),
        "pool.fc2.b": (p,),
        "dec.init.w": (hd, h + p + dz),
        "dec.init.b": (hd,),
        "dec.embed.w": (e, 2),
        "dec.embed.b": (e,),
        "dec.gru.w_ih": (3 * hd, e),
        "dec.gru.w_hh": (3 * hd, hd),
        "dec.gru.b_ih": (3 * hd,),
        "dec.gru.b_hh": (3 * hd,),
        "dec.head.w": (2, hd),
        "dec.head.b": (2,),
    }


def discriminator_shapes(hyper) -> dict:
    e = hyper["embed_dim"]
    h = hyper["disc_hidden"]
    return {
        "disc.embed.w": (e, 2),
        "disc.embed.b": (e,),
        "disc.gru.w_ih": (3 * h, e),
        "disc.gru.w_hh": (3 * h, h),
        "disc.gru.b_ih": (3 * h,),
        "disc.gru.b_hh": (3 * h,),
        "disc.head.w": (1, h),
        "disc.head.b": (1,),
    }


@dataclass(frozen=True)
class GenerativeModelWeights:
    tensors: dict  # name -> float ndarray
    hyper: dict

    def __post_init__(self):
        expected = generator_shapes(self.hyper)
        if any(name.startswith("disc.") for name in self.tensors):
            expected = {**expected, **discriminator_shapes(self.hyper)}
        for name, shape in expected.items():
            if name not in self.tensors:
                raise MissingTensorError(f"missing tensor {name}")
            if tuple(self.tensors[name].shape) != shape:
                raise ShapeMismatchError(
                    f"tensor {name}: expected shape {shape}, got {tuple(self.tensors[name].shape)}"
                )
            if not np.all(np.isfinite(self.tensors[name])):
                raise WeightFormatError(f"tensor {name} has non-finite entries")

    @property
    def has_discriminator(self) -> bool:
        return "disc.head.w" in self.tensors


def save_weights(weights: GenerativeModelWeights, out_dir) -> str:
    """Write manifest.json + weights.bin; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    blob = bytearray()
    for name in sorted(weights.tensors):
        arr = np.ascontiguousarray(weights.tensors[name], dtype="<f4")
        entries.append({
            "name": name,
            "shape": list(arr.shape),
            "offset": len(blob),
            "dtype": "f32",
        })
        blob.extend(arr.tobytes())
    manifest = {
        "tensors": entries,
        "hyperparameters": weights.hyper,
        "binary": "weights.bin",
    }
    with open(os.path.join(out_dir, "weights.bin"), "wb") as f:
        f.write(bytes(blob))
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest_path


def load_weights(manifest_path) -> GenerativeModelWeights:
    """Load and validate the portable weight format."""
    with open(manifest_path) as f:
        manifest = json.load(f)
    hyper = manifest["hyperparameters"]
    bin_path = os.path.join(os.path.dirname(manifest_path), manifest.get("binary", "weights.bin"))
    with open(bin_path, "rb") as f:
        blob = f.read()

    by_name = {e["name"]: e for e in manifest["tensors"]}
    expected = dict(generator_shapes(hyper))
    if any(name.startswith("disc.") for name in by_name):
        expected.update(discriminator_shapes(hyper))

    tensors = {}
    for name, shape in expected.items():
        if name not in by_name:
            raise MissingTensorError(f"missing tensor {name} in manifest")
        entry = by_name[name]
        if tuple(entry["shape"]) != shape:
            raise ShapeMismatchError(
                f"tensor {name}: manifest shape {tuple(entry['shape'])} "
                f"inconsistent with hyperparameters (expected {shape})"
            )
        if entry.get("dtype", "f32") != "f32":
            raise WeightFormatError(f"tensor {name}: unsupported dtype {entry['dtype']}")
        count = int(np.prod(shape))
        offset = int(entry["offset"])
        if offset + 4 * count > len(blob):
            raise TruncatedBinaryError(
                f"tensor {name}: binary truncated (needs {offset + 4 * count} bytes, has {len(blob)})"
            )
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
        tensors[name] = arr.astype(float).reshape(shape)
    return GenerativeModelWeights(tensors, hyper)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gru_step(x, hidden, w_ih, w_hh, b_ih, b_hh):
    """One GRU cell step; x (B, E), hidden (B, H); gate order r, z, n."""
    H = hidden.shape[1]
    gi = x @ w_ih.T + b_ih
    gh = hidden @ w_hh.T + b_hh
    r = _sigmoid(gi[:, :H] + gh[:, :H])
    z = _sigmoid(gi[:, H:2 * H] + gh[:, H:2 * H])
    n = np.tanh(gi[:, 2 * H:] + r * gh[:, 2 * H:])
    return (1.0 - z) * n + z * hidden


def pool(hidden_states, positions, weights: GenerativeModelWeights):
    """Max-pool neighbor features: for agent i, each j != i contributes
    MLP(concat(pos_j - pos_i, hidden_j)); single-agent scenes pool to zero."""
    hidden_states = np.asarray(hidden_states, dtype=float)
    positions = np.asarray(positions, dtype=float)
    n = hidden_states.shape[0]
    t = weights.tensors
    p_dim = t["pool.fc2.b"].shape[0]
    if hidden_states.shape[1] + 2 != t["pool.fc1.w"].shape[1]:
        raise ShapeMismatchError(
            f"pool input dim {hidden_states.shape[1] + 2} does not match "
            f"pool.fc1.w columns {t['pool.fc1.w'].shape[1]}"
        )
    if n == 1:
        return np.zeros((1, p_dim))
    rel = positions[None, :, :] - positions[:, None, :]              # (i, j, 2)
    feats = np.concatenate(
        [rel, np.broadcast_to(hidden_states[None, :, :], (n, n, hidden_states.shape[1]))], axis=2
    )
    out = np.maximum(feats @ t["pool.fc1.w"].T + t["pool.fc1.b"], 0.0)
    out = out @ t["pool.fc2.w"].T + t["pool.fc2.b"]                  # (i, j, P)
    mask = np.eye(n, dtype=bool)
    out = np.where(mask[:, :, None], -np.inf, out)
    return out.max(axis=1)


def sgan_forward(histories, weights: GenerativeModelWeights, z, horizon=None) -> np.ndarray:
    """Deterministic generator forward pass.

    histories: (n, h, 2) positions; z: (k, d_z) scene-level latents shared
    across agents. Returns predicted positions of shape (k, n, T, 2).
    """
    histories = np.asarray(histories, dtype=float)
    z = np.asarray(z, dtype=float)
    t = weights.tensors
    hyper = weights.hyper
    n = histories.shape[0]
    k = z.shape[0]
    T = hyper["T"] if horizon is None else int(horizon)
    if z.ndim != 2 or z.shape[1] != hyper["d_z"]:
        raise ShapeMismatchError(f"z must be (k, {hyper['d_z']}), got {z.shape}")

    # encoder over displacement sequences
    displacements = np.diff(histories, axis=1)               # (n, h-1, 2)
    hidden = np.zeros((n, hyper["enc_hidden"]))
    for step in range(displacements.shape[1]):
        x = displacements[:, step] @ t["enc.embed.w"].T + t["enc.embed.b"]
        hidden = gru_step(x, hidden, t["enc.gru.w_ih"], t["enc.gru.w_hh"],
                          t["enc.gru.b_ih"], t["enc.gru.b_hh"])

    pooled = pool(hidden, histories[:, -1], weights)

    # decoder, batched over (k, n)
    z_full = np.repeat(z[:, None, :], n, axis=1).reshape(k * n, -1)
    cond = np.concatenate([
        np.tile(hidden, (k, 1)), np.tile(pooled, (k, 1)), z_full
    ], axis=1)
    dec_hidden = cond @ t["dec.init.w"].T + t["dec.init.b"]
    prev = np.tile(displacements[:, -1], (k, 1))
    deltas = np.empty((k * n, T, 2))
    for step in range(T):
        x = prev @ t["dec.embed.w"].T + t["dec.embed.b"]
        dec_hidden = gru_step(x, dec_hidden, t["dec.gru.w_ih"], t["dec.gru.w_hh"],
                              t["dec.gru.b_ih"], t["dec.gru.b_hh"])
        prev = dec_hidden @ t["dec.head.w"].T + t["dec.head.b"]
        deltas[:, step] = prev

    positions = histories[None, :, None, -1, :] + np.cumsum(deltas.reshape(k, n, T, 2), axis=2)
    if not np.all(np.isfinite(positions)):
        raise ModelDivergenceError("generator produced non-finite positions")
    return positions


def predict_sgan(request: PredictionRequest, weights: GenerativeModelWeights) -> PredictionSet:
    """Sample k joint futures; z drawn from the seeded generator per sample."""
    rng = np.random.default_rng(np.uint64(request.seed))
    z = rng.standard_normal((request.num_samples, weights.hyper["d_z"]))
    positions = sgan_forward(request.histories, weights, z, horizon=request.horizon)
    samples = tuple(TrajectorySample(positions[i]) for i in range(request.num_samples))
    return PredictionSet(samples, "sgan", weights.hyper["dt_pred"],
                         request.histories[:, -1], padded=request.padded)


def discriminator_score(trajectory, weights: GenerativeModelWeights) -> float:
    """Sigmoid realness score for one agent trajectory of positions (L, 2)."""
    t = weights.tensors
    displacements = np.diff(np.asarray(trajectory, dtype=float), axis=0)[None]
    hidden = np.zeros((1, weights.hyper["disc_hidden"]))
    for step in range(displacements.shape[1]):
        x = displacements[:, step] @ t["disc.embed.w"].T + t["disc.embed.b"]
        hidden = gru_step(x, hidden, t["disc.gru.w_ih"], t["disc.gru.w_hh"],
                          t["disc.gru.b_ih"], t["disc.gru.b_hh"])
    logit = hidden @ t["disc.head.w"].T + t["disc.head.b"]
    return float(_sigmoid(logit)[0, 0])
