"""Decoder mapping encoder bottleneck features back to image space."""

from typing import Optional, Sequence, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F


class AdainDecoder(nn.Module):
    """Mirror of the encoder up to its bottleneck block.

    For a bottleneck at block b (stride 2**(b-1)) the decoder runs b-1
    conv → ReLU → 2× upsample stages, then two convs back to RGB.
    """

    def __init__(self, encoder_channels: Sequence[int], bottleneck_index: int) -> None:
        super().__init__()
        widths = list(encoder_channels[: bottleneck_index + 1])
        self.encoder_channels = list(encoder_channels)
        self.bottleneck_index = bottleneck_index
        layers = []
        for index in range(bottleneck_index, 0, -1):
            layers += [
                nn.ReflectionPad2d(1),
                nn.Conv2d(widths[index], widths[index - 1], 3),
                nn.ReLU(),
                nn.Upsample(scale_factor=2, mode="nearest"),
            ]
        layers += [
            nn.ReflectionPad2d(1),
            nn.Conv2d(widths[0], widths[0], 3),
            nn.ReLU(),
            nn.ReflectionPad2d(1),
            nn.Conv2d(widths[0], 3, 3),
        ]
        self.net = nn.Sequential(*layers)

    def forward(
        self, features: torch.Tensor, size: Optional[Tuple[int, int]] = None
    ) -> torch.Tensor:
        y = self.net(features)
        if size is not None and tuple(y.shape[-2:]) != tuple(size):
            y = F.interpolate(y, size=size, mode="bilinear", align_corners=False)
        return torch.sigmoid(y)
