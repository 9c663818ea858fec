"""Versioned binary checkpoints: JSON header with layer shapes + raw float64.

The byte layout is deterministic (sorted JSON keys, fixed array order), so
identical training runs produce identical checkpoint files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import SchemaError
from .policy import PolicyParams

MAGIC = b"QBCKPT"
FORMAT_VERSION = 1


def _param_arrays(params: PolicyParams):
    named = []
    for i, (W, b) in enumerate(params.actor):
        named.append((f"actor.{i}.W", W))
        named.append((f"actor.{i}.b", b))
    for i, (W, b) in enumerate(params.critic):
        named.append((f"critic.{i}.W", W))
        named.append((f"critic.{i}.b", b))
    named.append(("log_std", params.log_std))
    return named


def save_checkpoint(path, params: PolicyParams, meta: dict | None = None,
                    extra_arrays: dict | None = None) -> None:
    """meta must be JSON-serializable; extra_arrays are float64 ndarrays."""
    named = _param_arrays(params)
    for name, arr in sorted((extra_arrays or {}).items()):
        named.append((f"extra.{name}", np.asarray(arr, dtype=np.float64)))
    header = {
        "version": FORMAT_VERSION,
        "arrays": [
            {"name": name, "shape": list(arr.shape)} for name, arr in named
        ],
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(len(blob).to_bytes(8, "little"))
        f.write(blob)
        for _, arr in named:
            f.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())


def load_checkpoint(path):
    """Returns (PolicyParams, meta, extra_arrays)."""
    data = Path(path).read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise SchemaError("not a checkpoint file")
    n = int.from_bytes(data[len(MAGIC):len(MAGIC) + 8], "little")
    header = json.loads(data[len(MAGIC) + 8:len(MAGIC) + 8 + n])
    if header.get("version") != FORMAT_VERSION:
        raise SchemaError(f"unsupported checkpoint version {header.get('version')!r}")
    offset = len(MAGIC) + 8 + n
    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(
            data, dtype=np.float64, count=count, offset=offset
        ).reshape(shape).copy()
        arrays[entry["name"]] = arr
        offset += count * 8
    actor, critic = [], []
    i = 0
    while f"actor.{i}.W" in arrays:
        actor.append((arrays[f"actor.{i}.W"], arrays[f"actor.{i}.b"]))
        i += 1
    i = 0
    while f"critic.{i}.W" in arrays:
        critic.append((arrays[f"critic.{i}.W"], arrays[f"critic.{i}.b"]))
        i += 1
    params = PolicyParams(actor=actor, critic=critic, log_std=arrays["log_std"])
    extra = {
        name[len("extra."):]: arr
        for name, arr in arrays.items()
        if name.startswith("extra.")
    }
    return params, header["meta"], extra
