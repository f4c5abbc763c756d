"""Perceptual features: encoding, Gram matrices and the transfer losses."""

from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Union

import torch
import torch.nn.functional as F

from styleadapt.core.exceptions import (
    ConfigurationError,
    ContractViolationError,
    DomainError,
    NumericError,
)
from styleadapt.core.logging import get_logger
from styleadapt.domain.models import (
    EncoderTrainConfig,
    FeatureStack,
    GramMatrix,
    LabeledDataset,
    Split,
)
from styleadapt.domain.networks import EncoderClassifier, PerceptualEncoder
from styleadapt.domain.services.training_utils import (
    check_finite,
    cycle_batches,
    make_optimizer,
    progress,
)
from styleadapt.infrastructure.storage import (
    CheckpointRepository,
    ImageRepository,
    checkpoint_repository,
    image_repository,
)

logger = get_logger(__name__)

MIN_IMAGE_SIDE = 16

FeatureInput = Union[FeatureStack, Mapping[str, torch.Tensor]]


def _layers(stack: FeatureInput) -> Dict[str, torch.Tensor]:
    return dict(stack.layers) if isinstance(stack, FeatureStack) else dict(stack)


class FeatureService:
    """Service for perceptual encoder features and the losses built on them."""

    def __init__(
        self,
        checkpoints: Optional[CheckpointRepository] = None,
        images: Optional[ImageRepository] = None,
    ) -> None:
        self.checkpoints = checkpoints or checkpoint_repository
        self.images = images or image_repository

    @staticmethod
    def validate_images(images: torch.Tensor) -> torch.Tensor:
        """Check the image tensor contract and return a 4-D batch view.

        Raises:
            DomainError: If the tensor is not RGB, smaller than 16 pixels on
                a side, or holds non-finite values
        """
        batch = images.unsqueeze(0) if images.dim() == 3 else images
        if batch.dim() != 4 or batch.shape[1] != 3:
            raise DomainError(
                f"Expected 3×H×W images, got shape {tuple(images.shape)}"
            )
        if min(batch.shape[-2:]) < MIN_IMAGE_SIDE:
            raise DomainError(
                f"Images must be at least {MIN_IMAGE_SIDE} pixels per side",
                details={"shape": list(batch.shape)},
            )
        if not torch.isfinite(batch).all():
            raise DomainError("Images contain non-finite values")
        return batch

    def extract(
        self,
        images: torch.Tensor,
        encoder: PerceptualEncoder,
        layers: Sequence[str],
    ) -> Dict[str, torch.Tensor]:
        """Differentiable batch activations for the requested taps."""
        unknown = [layer for layer in layers if layer not in encoder.tap_set]
        if unknown or not layers:
            raise ConfigurationError(
                f"Unknown encoder layers {unknown or list(layers)}",
                details={"tap_set": encoder.tap_set},
            )
        return encoder(images, layers)

    def encode(
        self,
        image: torch.Tensor,
        encoder: PerceptualEncoder,
        layers: Sequence[str],
    ) -> FeatureStack:
        """
        Encode an image (3×H×W) or a batch (N×3×H×W) with a frozen encoder.

        Args:
            image: Image tensor with values in [0, 1]
            encoder: Frozen perceptual encoder
            layers: Layer ids, a subset of the encoder's tap set

        Returns:
            FeatureStack holding exactly the requested layers

        Raises:
            ContractViolationError: If the encoder is not frozen
            ConfigurationError: If a layer id is not in the tap set
            NumericError: If any activation is non-finite
        """
        if not encoder.frozen:
            raise ContractViolationError("encode requires a frozen encoder")
        batch = self.validate_images(image)
        with torch.no_grad():
            activations = self.extract(batch, encoder, layers)

        for layer, values in activations.items():
            if not torch.isfinite(values).all():
                raise NumericError(
                    f"Non-finite activations at layer {layer}", details={"layer": layer}
                )

        if image.dim() == 3:
            activations = {layer: values[0] for layer, values in activations.items()}
        return FeatureStack(layers=activations)

    @staticmethod
    def gram(features: torch.Tensor) -> GramMatrix:
        """
        Gram matrix of one layer, divided by C·H·W.

        Accepts C×H×W or N×C×H×W; a batch yields N×C×C values. The input
        dtype is kept.

        Raises:
            DomainError: If the feature map is empty
        """
        if features.dim() not in (3, 4):
            raise DomainError(f"Expected C×H×W features, got shape {tuple(features.shape)}")
        c, h, w = features.shape[-3:]
        if c == 0 or h * w == 0:
            raise DomainError("Cannot compute the Gram matrix of an empty feature map")
        flat = features.reshape(*features.shape[:-2], h * w)
        norm = float(c * h * w)
        return GramMatrix(values=flat @ flat.transpose(-1, -2) / norm, normalization=norm)

    @staticmethod
    def content_loss(transformed: FeatureInput, source: FeatureInput) -> torch.Tensor:
        """Σ over layers of ‖Φ(Î) − Φ(I)‖² / (C·H·W), averaged over a batch."""
        a, b = _layers(transformed), _layers(source)
        if set(a) != set(b):
            raise DomainError(
                "Feature stacks have different layers",
                details={"transformed": sorted(a), "source": sorted(b)},
            )
        total = None
        for layer in a:
            if a[layer].shape != b[layer].shape:
                raise DomainError(
                    f"Shape mismatch at layer {layer}",
                    details={"transformed": list(a[layer].shape), "source": list(b[layer].shape)},
                )
            term = F.mse_loss(a[layer], b[layer], reduction="mean")
            total = term if total is None else total + term
        if total is None:
            raise DomainError("content_loss needs at least one layer")
        return total

    def style_loss(self, transformed: FeatureInput, style_target: FeatureInput) -> torch.Tensor:
        """Σ over layers of ‖G(Î) − G(I_t)‖²_F, averaged over a batch."""
        a, b = _layers(transformed), _layers(style_target)
        if set(a) != set(b):
            raise DomainError(
                "Feature stacks have different layers",
                details={"transformed": sorted(a), "style": sorted(b)},
            )
        target_grams = {}
        for layer, values in b.items():
            if values.shape[-3] != a[layer].shape[-3]:
                raise DomainError(
                    f"Channel mismatch at layer {layer}",
                    details={
                        "transformed": int(a[layer].shape[-3]),
                        "style": int(values.shape[-3]),
                    },
                )
            target_grams[layer] = self.gram(values).values
        return self.style_loss_from_grams(a, target_grams)

    def style_loss_from_grams(
        self, transformed: FeatureInput, target_grams: Mapping[str, torch.Tensor]
    ) -> torch.Tensor:
        """Style loss against precomputed target Grams (broadcast over the batch)."""
        a = _layers(transformed)
        total = None
        for layer, values in a.items():
            diff = self.gram(values).values - target_grams[layer]
            term = diff.pow(2).sum(dim=(-2, -1)).mean()
            total = term if total is None else total + term
        if total is None:
            raise DomainError("style_loss needs at least one layer")
        return total

    def style_grams(
        self, style_image: torch.Tensor, encoder: PerceptualEncoder
    ) -> Dict[str, torch.Tensor]:
        """Gram matrices of a style image at every style layer (1×C×C each)."""
        stack = self.encode(self.validate_images(style_image), encoder, encoder.style_layers)
        return {layer: self.gram(values).values for layer, values in stack.layers.items()}

    @staticmethod
    def build_perceptual_encoder(
        seed: int = 0, channels: Sequence[int] = (16, 32, 64, 64)
    ) -> PerceptualEncoder:
        """Randomly initialised, frozen encoder (global RNG state untouched)."""
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            encoder = PerceptualEncoder(channels)
        return encoder.freeze()

    def train_perceptual_encoder(
        self, source: LabeledDataset, config: EncoderTrainConfig, seed: int
    ) -> PerceptualEncoder:
        """Train the encoder as an object classifier on the source train split."""
        train = source.subset(split=Split.TRAIN)
        images = self.images.load_batch(train.paths())
        labels = torch.tensor(train.labels(), dtype=torch.long)
        return self.fit_encoder(images, labels, source.num_classes, config, seed)

    def fit_encoder(
        self,
        images: torch.Tensor,
        labels: torch.Tensor,
        num_classes: int,
        config: EncoderTrainConfig,
        seed: int,
    ) -> PerceptualEncoder:
        """
        Train a fresh encoder with a temporary linear head, then freeze it.

        The head is discarded. The returned encoder carries the final
        training accuracy in ``train_accuracy``.

        Raises:
            ConfigurationError: If fewer than two classes are present or a
                class has fewer than ``min_images_per_class`` images
        """
        present = torch.unique(labels)
        if num_classes < 2 or present.numel() < 2:
            raise ConfigurationError(
                "Encoder training needs at least two classes",
                details={"classes": int(present.numel())},
            )
        counts = torch.bincount(labels, minlength=num_classes)
        short = [int(i) for i in present if counts[i] < config.min_images_per_class]
        if short:
            raise ConfigurationError(
                f"Classes {short} have fewer than {config.min_images_per_class} images"
            )
        images = self.validate_images(images)

        logger.info(
            "Training perceptual encoder",
            extra={"seed": seed, "images": int(images.shape[0]), "classes": num_classes},
        )
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            encoder = PerceptualEncoder(config.channels)
            model = EncoderClassifier(encoder, num_classes)
            generator = torch.Generator().manual_seed(seed)
            optimizer = make_optimizer(model.parameters(), config)
            batches = cycle_batches(images.shape[0], config.batch_size, generator)

            model.train()
            for iteration in progress(config.iterations, "encoder"):
                index = next(batches)
                loss = F.cross_entropy(model(images[index]), labels[index])
                check_finite(loss, iteration)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()

            model.eval()
            with torch.no_grad():
                predictions = torch.cat(
                    [model(chunk).argmax(dim=1) for chunk in images.split(256)]
                )
        accuracy = float((predictions == labels).float().mean())
        logger.info("Perceptual encoder trained", extra={"train_accuracy": accuracy})

        encoder.freeze()
        encoder.train_accuracy = accuracy
        return encoder

    def save_encoder(self, encoder: PerceptualEncoder, path: Union[str, Path], seed: int) -> Path:
        return self.checkpoints.write(
            path,
            "encoder",
            encoder.state_dict(),
            architecture=encoder.architecture(),
            tap_set=encoder.tap_set,
            content_layers=encoder.content_layers,
            style_layers=encoder.style_layers,
            seed=seed,
        )

    def load_encoder(self, path: Union[str, Path]) -> PerceptualEncoder:
        header, state = self.checkpoints.load(path, kind="encoder")
        encoder = PerceptualEncoder(header["architecture"]["channels"])
        encoder.load_state_dict(state)
        return encoder.freeze()


# Global feature service instance
feature_service = FeatureService()
