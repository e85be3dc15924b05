"""Torch reference implementation of the generative social-pooling predictor.

This is an independent forward pass (torch modules, not the navigation
package's numpy code) used to produce golden inference vectors. Checkpoints
are torch files holding ``{"state_dict": ..., "config": ...}`` where config
carries the architecture hyperparameters.
"""

from __future__ import annotations

import torch
from torch import nn

DEFAULT_CONFIG = {
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


class ReferenceGenerator(nn.Module):
    """Encoder GRU over displacements, one max-pooling round over neighbor
    features, decoder GRU emitting future displacements conditioned on
    (encoder hidden, pooled, scene latent z)."""

    def __init__(self, config):
        super().__init__()
        self.config = dict(config)
        e = config["embed_dim"]
        h = config["enc_hidden"]
        hd = config["dec_hidden"]
        p = config["pool_dim"]
        dz = config["d_z"]
        self.embed = nn.Linear(2, e)
        self.enc_gru = nn.GRUCell(e, h)
        self.pool_fc1 = nn.Linear(h + 2, p)
        self.pool_fc2 = nn.Linear(p, p)
        self.dec_init = nn.Linear(h + p + dz, hd)
        self.dec_embed = nn.Linear(2, e)
        self.dec_gru = nn.GRUCell(e, hd)
        self.head = nn.Linear(hd, 2)

    def _pool(self, hidden, positions):
        n = hidden.shape[0]
        if n == 1:
            return hidden.new_zeros((1, self.config["pool_dim"]))
        rel = positions.unsqueeze(0) - positions.unsqueeze(1)           # (i, j, 2)
        feats = torch.cat(
            [rel, hidden.unsqueeze(0).expand(n, -1, -1)], dim=2)
        out = self.pool_fc2(torch.relu(self.pool_fc1(feats)))           # (i, j, P)
        mask = torch.eye(n, dtype=torch.bool, device=out.device)
        out = out.masked_fill(mask.unsqueeze(2), float("-inf"))
        return out.max(dim=1).values

    @torch.no_grad()
    def forward(self, histories, z, horizon=None):
        """histories (n, h, 2), z (k, d_z) -> predicted positions (k, n, T, 2)."""
        histories = torch.as_tensor(histories, dtype=torch.float64)
        z = torch.as_tensor(z, dtype=torch.float64)
        n = histories.shape[0]
        k = z.shape[0]
        horizon = self.config["T"] if horizon is None else int(horizon)

        displacements = histories[:, 1:] - histories[:, :-1]            # (n, h-1, 2)
        hidden = histories.new_zeros((n, self.config["enc_hidden"]))
        for step in range(displacements.shape[1]):
            hidden = self.enc_gru(self.embed(displacements[:, step]), hidden)

        pooled = self._pool(hidden, histories[:, -1])

        z_full = z.unsqueeze(1).expand(k, n, -1).reshape(k * n, -1)
        cond = torch.cat(
            [hidden.repeat(k, 1), pooled.repeat(k, 1), z_full], dim=1)
        dec_hidden = self.dec_init(cond)
        prev = displacements[:, -1].repeat(k, 1)
        deltas = []
        for _ in range(horizon):
            dec_hidden = self.dec_gru(self.dec_embed(prev), dec_hidden)
            prev = self.head(dec_hidden)
            deltas.append(prev)
        deltas = torch.stack(deltas, dim=1).reshape(k, n, horizon, 2)
        last = histories[:, -1].reshape(1, n, 1, 2)
        return last + torch.cumsum(deltas, dim=2)


def make_reference_checkpoint(path, config=None, seed=0) -> str:
    """Create a seeded randomly-initialized reference checkpoint."""
    config = dict(DEFAULT_CONFIG if config is None else config)
    torch.manual_seed(seed)
    model = ReferenceGenerator(config)
    torch.save({"state_dict": model.state_dict(), "config": config}, path)
    return path


def load_checkpoint(path):
    """Load a checkpoint; returns (model in float64 eval mode, config)."""
    doc = torch.load(path, map_location="cpu", weights_only=True)
    if "state_dict" not in doc or "config" not in doc:
        raise ValueError(f"{path}: checkpoint must hold 'state_dict' and 'config'")
    model = ReferenceGenerator(doc["config"])
    model.load_state_dict(doc["state_dict"])
    model.double().eval()
    return model, dict(doc["config"])
