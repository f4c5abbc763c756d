"""Content hashing helpers for artifacts, configs and model weights."""

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping, Union

import torch
from pydantic import BaseModel

_CHUNK = 1 << 20


def sha256_file(path: Union[str, Path]) -> str:
    """Hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def fingerprint(data: Any) -> str:
    """Hex SHA-256 of a canonical JSON dump (pydantic models are dumped first)."""
    if isinstance(data, BaseModel):
        data = data.model_dump(mode="json")
    payload = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def state_dict_fingerprint(state: Mapping[str, torch.Tensor]) -> str:
    """Hex SHA-256 over parameter names and raw tensor bytes."""
    digest = hashlib.sha256()
    for name in sorted(state):
        tensor = state[name].detach().cpu().contiguous()
        digest.update(name.encode("utf-8"))
        digest.update(str(tensor.dtype).encode("utf-8"))
        digest.update(str(tuple(tensor.shape)).encode("utf-8"))
        digest.update(tensor.numpy().tobytes())
    return digest.hexdigest()
