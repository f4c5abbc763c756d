"""Torch network definitions."""

from .classifier import (
    DualHeadClassifier,
    DualHeadOutput,
    GradientReversal,
    GradientReversalFunction,
    grad_reverse,
)
from .decoder import AdainDecoder
from .encoder import (
    CONTENT_LAYER,
    LAYER_IDS,
    STYLE_LAYERS,
    EncoderClassifier,
    PerceptualEncoder,
)
from .transform import TransformNet

__all__ = [
    "AdainDecoder",
    "CONTENT_LAYER",
    "DualHeadClassifier",
    "DualHeadOutput",
    "EncoderClassifier",
    "GradientReversal",
    "GradientReversalFunction",
    "LAYER_IDS",
    "PerceptualEncoder",
    "STYLE_LAYERS",
    "TransformNet",
    "grad_reverse",
]
