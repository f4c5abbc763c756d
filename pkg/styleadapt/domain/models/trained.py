"""Trained model bundles: a network plus the metadata needed to reuse it."""

from typing import List, Optional, Tuple

from pydantic import Field

from styleadapt.domain.networks import (
    AdainDecoder,
    DualHeadClassifier,
    PerceptualEncoder,
    TransformNet,
)

from .common import Schema
from .training import (
    AdaptConfig,
    DecoderTrainConfig,
    ReconstructionRecord,
    TransferLossRecord,
    TransferTrainConfig,
)


def _running_mean(values: List[float], window: int) -> float:
    tail = values[-window:]
    return sum(tail) / len(tail)


class TransformNetwork(Schema):
    """Feed-forward transfer network θ_t^j trained towards one style image."""

    network: TransformNet
    style_image_id: str = Field(..., description="Pool image the network imitates")
    config: TransferTrainConfig
    history: List[TransferLossRecord] = Field(default_factory=list)

    def style_loss_progress(self, window: Optional[int] = None) -> Tuple[float, float]:
        """(style loss at iteration 0, running style loss over the last window)."""
        if not self.history:
            raise ValueError("network has no training history")
        window = window or self.config.smoothing_window
        values = [record.style_loss for record in self.history]
        return values[0], _running_mean(values, window)


class EncoderDecoder(Schema):
    """Frozen encoder plus decoder trained from its bottleneck layer."""

    encoder: PerceptualEncoder
    decoder: AdainDecoder
    bottleneck_layer: str
    epsilon: float = Field(default=1e-5, gt=0)
    config: Optional[DecoderTrainConfig] = None
    history: List[ReconstructionRecord] = Field(default_factory=list)

    def reconstruction_progress(self, window: Optional[int] = None) -> Tuple[float, float]:
        """(reconstruction loss at iteration 0, running loss over the last window)."""
        if not self.history:
            raise ValueError("decoder has no training history")
        window = window or (self.config.smoothing_window if self.config else 50)
        values = [record.loss for record in self.history]
        return values[0], _running_mean(values, window)


class AdaptModel(Schema):
    """Dual-head classifier with its class vocabulary and training config."""

    network: DualHeadClassifier
    class_names: List[str]
    config: AdaptConfig
    method: str = Field(default="adapted", description="Tag carried into reports")
