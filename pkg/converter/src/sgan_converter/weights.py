"""Export torch checkpoints into the portable weight format.

Portable format contract (kept deliberately duplicated here rather than
imported, so the exporter validates it independently): ``manifest.json``
lists one entry per tensor — name, shape, byte offset, dtype "f32" — plus
the hyperparameters and the binary filename; ``weights.bin`` holds the
concatenated row-major little-endian float32 values.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import torch


class WeightExportError(ValueError):
    pass


class UnmappedTensorError(WeightExportError):
    pass


def portable_generator_shapes(config) -> dict:
    e = config["embed_dim"]
    h = config["enc_hidden"]
    hd = config["dec_hidden"]
    p = config["pool_dim"]
    dz = config["d_z"]
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


@dataclass(frozen=True)
class MapEntry:
    """Maps one checkpoint tensor to one portable tensor, with optional
    transpose and reshape applied in that order."""
    source: str
    target: str
    transpose: bool = False
    reshape: tuple = None


@dataclass(frozen=True)
class TensorNameMap:
    entries: tuple

    @classmethod
    def from_pairs(cls, pairs):
        return cls(tuple(MapEntry(src, dst) for src, dst in pairs))

    @classmethod
    def from_json(cls, doc):
        entries = []
        for item in doc:
            entries.append(MapEntry(
                source=item["source"],
                target=item["target"],
                transpose=bool(item.get("transpose", False)),
                reshape=tuple(item["reshape"]) if item.get("reshape") else None,
            ))
        return cls(tuple(entries))

    def by_target(self) -> dict:
        out = {}
        for entry in self.entries:
            if entry.target in out:
                raise WeightExportError(f"duplicate map target {entry.target}")
            out[entry.target] = entry
        return out


DEFAULT_NAME_MAP = TensorNameMap.from_pairs([
    ("embed.weight", "enc.embed.w"),
    ("embed.bias", "enc.embed.b"),
    ("enc_gru.weight_ih", "enc.gru.w_ih"),
    ("enc_gru.weight_hh", "enc.gru.w_hh"),
    ("enc_gru.bias_ih", "enc.gru.b_ih"),
    ("enc_gru.bias_hh", "enc.gru.b_hh"),
    ("pool_fc1.weight", "pool.fc1.w"),
    ("pool_fc1.bias", "pool.fc1.b"),
    ("pool_fc2.weight", "pool.fc2.w"),
    ("pool_fc2.bias", "pool.fc2.b"),
    ("dec_init.weight", "dec.init.w"),
    ("dec_init.bias", "dec.init.b"),
    ("dec_embed.weight", "dec.embed.w"),
    ("dec_embed.bias", "dec.embed.b"),
    ("dec_gru.weight_ih", "dec.gru.w_ih"),
    ("dec_gru.weight_hh", "dec.gru.w_hh"),
    ("dec_gru.bias_ih", "dec.gru.b_ih"),
    ("dec_gru.bias_hh", "dec.gru.b_hh"),
    ("head.weight", "dec.head.w"),
    ("head.bias", "dec.head.b"),
])


def export_weights(checkpoint_path, out_dir, name_map: TensorNameMap = None) -> str:
    """Export a checkpoint to out_dir/{manifest.json, weights.bin}.

    Every portable tensor must be covered by the name map and match its
    expected shape after the transpose/reshape directives; values are
    written as float32 without further modification. Returns the manifest
    path.
    """
    name_map = DEFAULT_NAME_MAP if name_map is None else name_map
    doc = torch.load(checkpoint_path, map_location="cpu", weights_only=True)
    if "state_dict" not in doc or "config" not in doc:
        raise WeightExportError(
            f"{checkpoint_path}: checkpoint must hold 'state_dict' and 'config'")
    state, config = doc["state_dict"], dict(doc["config"])
    expected = portable_generator_shapes(config)
    by_target = name_map.by_target()

    tensors = {}
    for target, shape in expected.items():
        entry = by_target.get(target)
        if entry is None:
            raise UnmappedTensorError(f"no map entry produces portable tensor {target}")
        if entry.source not in state:
            raise WeightExportError(
                f"checkpoint tensor {entry.source} (mapped to {target}) not found"
            )
        arr = state[entry.source].detach().cpu().numpy()
        if entry.transpose:
            arr = arr.T
        if entry.reshape is not None:
            arr = arr.reshape(entry.reshape)
        if tuple(arr.shape) != shape:
            raise WeightExportError(
                f"tensor {target}: expected shape {shape}, "
                f"got {tuple(arr.shape)} from {entry.source}"
            )
        if not np.all(np.isfinite(arr)):
            raise WeightExportError(f"tensor {target} has non-finite entries")
        tensors[target] = np.ascontiguousarray(arr, dtype="<f4")

    os.makedirs(out_dir, exist_ok=True)
    entries = []
    blob = bytearray()
    for name in sorted(tensors):
        entries.append({
            "name": name,
            "shape": list(tensors[name].shape),
            "offset": len(blob),
            "dtype": "f32",
        })
        blob.extend(tensors[name].tobytes())
    manifest = {
        "tensors": entries,
        "hyperparameters": config,
        "binary": "weights.bin",
    }
    with open(os.path.join(out_dir, "weights.bin"), "wb") as f:
        f.write(bytes(blob))
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest_path


def read_portable(manifest_path) -> dict:
    """Read back a portable weight directory; returns (tensors, hyper)."""
    with open(manifest_path) as f:
        manifest = json.load(f)
    bin_path = os.path.join(os.path.dirname(manifest_path),
                            manifest.get("binary", "weights.bin"))
    with open(bin_path, "rb") as f:
        blob = f.read()
    tensors = {}
    for entry in manifest["tensors"]:
        count = int(np.prod(entry["shape"]))
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=int(entry["offset"]))
        tensors[entry["name"]] = arr.reshape(entry["shape"]).copy()
    return tensors, manifest["hyperparameters"]
