"""Feed-forward image transformation network (one network per style)."""

import torch
import torch.nn as nn
import torch.nn.functional as F


class ConvLayer(nn.Module):
    def __init__(
        self, in_channels: int, out_channels: int, kernel_size: int, stride: int = 1
    ) -> None:
        super().__init__()
        self.pad = nn.ReflectionPad2d(kernel_size // 2)
        self.conv = nn.Conv2d(in_channels, out_channels, kernel_size, stride)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.conv(self.pad(x))


class ResidualBlock(nn.Module):
    def __init__(self, channels: int) -> None:
        super().__init__()
        self.conv1 = ConvLayer(channels, channels, 3)
        self.in1 = nn.InstanceNorm2d(channels, affine=True)
        self.conv2 = ConvLayer(channels, channels, 3)
        self.in2 = nn.InstanceNorm2d(channels, affine=True)
        self.relu = nn.ReLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        r = self.relu(self.in1(self.conv1(x)))
        r = self.in2(self.conv2(r))
        return x + r


class UpsampleConvLayer(nn.Module):
    """Nearest-neighbour 2× upsampling followed by a convolution."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int) -> None:
        super().__init__()
        self.conv = ConvLayer(in_channels, out_channels, kernel_size)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.conv(F.interpolate(x, scale_factor=2, mode="nearest"))


class TransformNet(nn.Module):
    """conv-down ×2 → 2 residual blocks → upsample ×2 → sigmoid output conv."""

    def __init__(self, width: int = 16) -> None:
        super().__init__()
        self.width = width
        self.encode = nn.Sequential(
            ConvLayer(3, width, 5),
            nn.InstanceNorm2d(width, affine=True),
            nn.ReLU(),
            ConvLayer(width, 2 * width, 3, stride=2),
            nn.InstanceNorm2d(2 * width, affine=True),
            nn.ReLU(),
            ConvLayer(2 * width, 4 * width, 3, stride=2),
            nn.InstanceNorm2d(4 * width, affine=True),
            nn.ReLU(),
        )
        self.residual = nn.Sequential(ResidualBlock(4 * width), ResidualBlock(4 * width))
        self.decode = nn.Sequential(
            UpsampleConvLayer(4 * width, 2 * width, 3),
            nn.InstanceNorm2d(2 * width, affine=True),
            nn.ReLU(),
            UpsampleConvLayer(2 * width, width, 3),
            nn.InstanceNorm2d(width, affine=True),
            nn.ReLU(),
            ConvLayer(width, 3, 5),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.decode(self.residual(self.encode(x)))
        if y.shape[-2:] != x.shape[-2:]:
            # sizes not divisible by 4
            y = F.interpolate(y, size=x.shape[-2:], mode="bilinear", align_corners=False)
        return torch.sigmoid(y)
