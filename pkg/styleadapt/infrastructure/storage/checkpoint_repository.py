"""Versioned checkpoint container for every trained network."""

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import torch

from styleadapt.core.exceptions import ArtifactIOError
from styleadapt.core.logging import get_logger
from styleadapt.infrastructure.storage.base_repository import BaseFileRepository, PathLike

logger = get_logger(__name__)

CHECKPOINT_FORMAT_VERSION = 1

Checkpoint = Tuple[Dict[str, Any], Dict[str, torch.Tensor]]


class CheckpointRepository(BaseFileRepository[Checkpoint]):
    """Stores ``{"header": ..., "state": state_dict}`` with torch.save.

    The header carries the format version, the checkpoint kind (encoder,
    transform, decoder, adapt), the architecture descriptor, the tap set, the
    seed and kind-specific metadata. Headers hold plain python values only so
    checkpoints load with ``weights_only=True``.
    """

    def __init__(self) -> None:
        super().__init__("checkpoint")

    def save(self, item: Checkpoint, path: PathLike) -> Path:
        header, state = item
        path = self.prepare(path)
        payload = {
            "header": {**header, "format_version": CHECKPOINT_FORMAT_VERSION},
            "state": {name: tensor.detach().cpu() for name, tensor in state.items()},
        }
        torch.save(payload, path)
        logger.debug(
            "Checkpoint written", extra={"path": str(path), "kind": header.get("kind")}
        )
        return path

    def write(
        self,
        path: PathLike,
        kind: str,
        state: Mapping[str, torch.Tensor],
        **header: Any,
    ) -> Path:
        return self.save(({"kind": kind, **header}, dict(state)), path)

    def load(self, path: PathLike, kind: Optional[str] = None) -> Checkpoint:
        """Load a checkpoint, checking its version and kind.

        Raises:
            ArtifactIOError: If the file is missing, corrupt, of another kind
                or written by an unsupported format version
        """
        path = self.require(path)
        try:
            payload = torch.load(path, map_location="cpu", weights_only=True)
        except Exception as e:
            raise ArtifactIOError(
                f"Corrupt checkpoint {path}: {e}", details={"path": str(path)}
            ) from e

        if not isinstance(payload, dict) or "header" not in payload or "state" not in payload:
            raise ArtifactIOError(f"Not a styleadapt checkpoint: {path}")
        header = payload["header"]
        version = header.get("format_version")
        if version != CHECKPOINT_FORMAT_VERSION:
            raise ArtifactIOError(
                f"Unsupported checkpoint format {version} in {path}",
                details={"expected": CHECKPOINT_FORMAT_VERSION, "found": version},
            )
        if kind is not None and header.get("kind") != kind:
            raise ArtifactIOError(
                f"Checkpoint {path} holds a {header.get('kind')!r}, expected {kind!r}"
            )
        return header, payload["state"]


checkpoint_repository = CheckpointRepository()
