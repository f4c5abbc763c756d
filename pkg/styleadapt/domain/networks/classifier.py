"""Dual-head classifier with a gradient-reversed modality branch."""

from typing import NamedTuple, Sequence

import torch
import torch.nn as nn

from .encoder import LAYER_IDS, PerceptualEncoder


class GradientReversalFunction(torch.autograd.Function):
    """Identity forward; negated gradient backward."""

    @staticmethod
    def forward(ctx, x: torch.Tensor) -> torch.Tensor:
        return x.view_as(x)

    @staticmethod
    def backward(ctx, grad_output: torch.Tensor) -> torch.Tensor:
        return grad_output.neg()


def grad_reverse(features: torch.Tensor) -> torch.Tensor:
    return GradientReversalFunction.apply(features)


class GradientReversal(nn.Module):
    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return grad_reverse(x)


class DualHeadOutput(NamedTuple):
    object_logits: torch.Tensor
    modality_logits: torch.Tensor
    features: torch.Tensor


class DualHeadClassifier(nn.Module):
    """Shared trunk θ_F, object head θ_Y and modality head θ_D.

    θ_F is the encoder topology followed by global average pooling and one
    fully connected layer; both heads read that shared layer. The modality
    head sits behind a gradient reversal.
    """

    def __init__(
        self,
        num_classes: int,
        channels: Sequence[int] = (16, 32, 64, 64),
        fc_dim: int = 64,
    ) -> None:
        super().__init__()
        self.num_classes = num_classes
        self.trunk = PerceptualEncoder(channels)
        self.fc = nn.Sequential(nn.Linear(self.trunk.channels[-1], fc_dim), nn.ReLU())
        self.object_head = nn.Linear(fc_dim, num_classes)
        self.reversal = GradientReversal()
        self.modality_head = nn.Linear(fc_dim, 2)

    def features(self, x: torch.Tensor) -> torch.Tensor:
        top = self.trunk(x, [LAYER_IDS[-1]])[LAYER_IDS[-1]]
        return self.fc(top.mean(dim=(2, 3)))

    def forward(self, x: torch.Tensor, reverse: bool = True) -> DualHeadOutput:
        f = self.features(x)
        modality_input = self.reversal(f) if reverse else f
        return DualHeadOutput(self.object_head(f), self.modality_head(modality_input), f)

    def architecture(self) -> dict:
        return {
            "name": "dual-head",
            "channels": list(self.trunk.channels),
            "fc_dim": self.fc[0].out_features,
            "num_classes": self.num_classes,
        }
