"""Desk-scale perceptual encoder.

Four blocks of conv3×3 → ReLU → 2× average-pool. The tap of each block is
its ReLU output (before pooling), so block i sees the input at stride 2**i.
block3 plays the content-layer role; all four blocks are style layers.
"""

from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import torch
import torch.nn as nn

LAYER_IDS: Tuple[str, ...] = ("block1", "block2", "block3", "block4")
CONTENT_LAYER = "block3"
STYLE_LAYERS: Tuple[str, ...] = LAYER_IDS
ARCHITECTURE_NAME = "conv4-avgpool"


class ConvBlock(nn.Module):
    """conv3×3 (reflect padded) followed by ReLU."""

    def __init__(self, in_channels: int, out_channels: int) -> None:
        super().__init__()
        self.conv = nn.Conv2d(
            in_channels, out_channels, kernel_size=3, padding=1, padding_mode="reflect"
        )
        self.relu = nn.ReLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.relu(self.conv(x))


class PerceptualEncoder(nn.Module):
    """Multi-scale feature extractor with a declared tap set."""

    def __init__(self, channels: Sequence[int] = (16, 32, 64, 64)) -> None:
        super().__init__()
        if len(channels) != len(LAYER_IDS):
            raise ValueError(f"expected {len(LAYER_IDS)} block widths, got {channels}")
        self.channels: List[int] = [int(c) for c in channels]
        widths = [3] + self.channels
        self.blocks = nn.ModuleList(
            ConvBlock(widths[i], widths[i + 1]) for i in range(len(LAYER_IDS))
        )
        self.pool = nn.AvgPool2d(kernel_size=2, stride=2)
        self.frozen = False

    @property
    def tap_set(self) -> List[str]:
        return list(LAYER_IDS)

    @property
    def content_layers(self) -> List[str]:
        return [CONTENT_LAYER]

    @property
    def style_layers(self) -> List[str]:
        return list(STYLE_LAYERS)

    def layer_channels(self, layer_id: str) -> int:
        return self.channels[LAYER_IDS.index(layer_id)]

    def output_shape(self, layer_id: str, height: int, width: int) -> Tuple[int, int, int]:
        """C×H×W of a tap for an input of the given size (floor pooling)."""
        index = LAYER_IDS.index(layer_id)
        h, w = height, width
        for _ in range(index):
            h, w = h // 2, w // 2
        return self.channels[index], h, w

    def architecture(self) -> Dict[str, Any]:
        return {"name": ARCHITECTURE_NAME, "channels": list(self.channels)}

    def freeze(self) -> "PerceptualEncoder":
        """Stop gradients and mark the encoder immutable."""
        for param in self.parameters():
            param.requires_grad_(False)
        self.eval()
        self.frozen = True
        return self

    def train(self, mode: bool = True) -> "PerceptualEncoder":
        # A frozen encoder stays in eval mode.
        return super().train(mode and not self.frozen)

    def forward(
        self, x: torch.Tensor, layers: Optional[Iterable[str]] = None
    ) -> Dict[str, torch.Tensor]:
        """Return the activations of the requested taps (all taps by default)."""
        wanted = list(LAYER_IDS) if layers is None else list(layers)
        last = max(LAYER_IDS.index(layer) for layer in wanted)
        outputs: Dict[str, torch.Tensor] = {}
        h = x
        for index, block in enumerate(self.blocks[: last + 1]):
            if index > 0:
                h = self.pool(h)
            h = block(h)
            if LAYER_IDS[index] in wanted:
                outputs[LAYER_IDS[index]] = h
        return {layer: outputs[layer] for layer in wanted}


class EncoderClassifier(nn.Module):
    """Encoder plus a linear head, used only to train the encoder."""

    def __init__(self, encoder: PerceptualEncoder, num_classes: int) -> None:
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.channels[-1], num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        top = self.encoder(x, [LAYER_IDS[-1]])[LAYER_IDS[-1]]
        return self.head(top.mean(dim=(2, 3)))
