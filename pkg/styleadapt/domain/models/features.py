"""Feature-space domain models: per-layer activations and Gram matrices."""

from typing import Dict, Iterator, List

import torch
from pydantic import Field

from .common import Schema


class FeatureStack(Schema):
    """Named per-layer activations of an image (C×H×W) or a batch (N×C×H×W)."""

    layers: Dict[str, torch.Tensor] = Field(default_factory=dict)

    def __getitem__(self, layer_id: str) -> torch.Tensor:
        return self.layers[layer_id]

    def __iter__(self) -> Iterator[str]:  # type: ignore[override]
        return iter(self.layers)

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def layer_ids(self) -> List[str]:
        return list(self.layers)


class GramMatrix(Schema):
    """Channel inner products of one feature map, divided by C·H·W."""

    values: torch.Tensor = Field(..., description="C×C (or N×C×C) Gram values")
    normalization: float = Field(..., gt=0, description="Divisor used (C·H·W)")
