"""Arbitrary style transfer by matching channel-wise feature statistics."""

from pathlib import Path
from typing import List, Optional, Tuple, Union

import torch
import torch.nn.functional as F

from styleadapt.core.exceptions import (
    ConfigurationError,
    ContractViolationError,
    DomainError,
)
from styleadapt.core.logging import get_logger
from styleadapt.domain.models import (
    DecoderTrainConfig,
    EncoderDecoder,
    ReconstructionRecord,
)
from styleadapt.domain.networks import (
    CONTENT_LAYER,
    LAYER_IDS,
    AdainDecoder,
    PerceptualEncoder,
)
from styleadapt.domain.services.feature_service import FeatureService, feature_service
from styleadapt.domain.services.training_utils import (
    check_finite,
    cycle_batches,
    make_optimizer,
    progress,
)
from styleadapt.infrastructure.storage import CheckpointRepository, checkpoint_repository

logger = get_logger(__name__)


def channel_stats(features: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    """Per-channel spatial mean and population standard deviation."""
    mean = features.mean(dim=(-2, -1), keepdim=True)
    std = features.var(dim=(-2, -1), correction=0, keepdim=True).sqrt()
    return mean, std


class AdainTransferService:
    """Service for the encoder-decoder (AdaIN) transfer path."""

    def __init__(
        self,
        features: Optional[FeatureService] = None,
        checkpoints: Optional[CheckpointRepository] = None,
    ) -> None:
        self.features = features or feature_service
        self.checkpoints = checkpoints or checkpoint_repository

    @staticmethod
    def adain(
        content_features: torch.Tensor,
        style_features: torch.Tensor,
        epsilon: float = 1e-5,
    ) -> torch.Tensor:
        """
        Re-scale content features to the style's per-channel mean and std.

        out = σ(style)·(x − μ(content)) / (σ(content) + ε) + μ(style), with
        population statistics over spatial positions. Works on C×H×W maps or
        N×C×H×W batches; style batches of size one broadcast.

        Raises:
            ConfigurationError: If epsilon is not positive
            DomainError: If the channel counts differ
        """
        if epsilon <= 0:
            raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
        if content_features.shape[-3] != style_features.shape[-3]:
            raise DomainError(
                "Channel mismatch between content and style features",
                details={
                    "content": int(content_features.shape[-3]),
                    "style": int(style_features.shape[-3]),
                },
            )
        content_mean, content_std = channel_stats(content_features)
        style_mean, style_std = channel_stats(style_features)
        normalized = (content_features - content_mean) / (content_std + epsilon)
        return style_std * normalized + style_mean

    def train_decoder(
        self,
        source_images: torch.Tensor,
        encoder: PerceptualEncoder,
        config: DecoderTrainConfig,
        seed: int,
    ) -> EncoderDecoder:
        """
        Train the decoder to reconstruct images from the bottleneck features.

        The loss is the pixel MSE ‖decoder(encode(x)) − x‖². With
        ``config.style_augmented`` the decoder additionally stylizes each
        image towards the next image in its batch and adds the AdaIN content
        loss and the Gram style loss of that output.

        Raises:
            ConfigurationError: If fewer than ``min_source_images`` are given
            TrainingDivergenceError: If the loss becomes NaN or infinite
        """
        if not encoder.frozen:
            raise ContractViolationError("decoder training requires a frozen encoder")
        source_images = self.features.validate_images(source_images)
        n = source_images.shape[0]
        if n < config.min_source_images:
            raise ConfigurationError(
                f"Decoder training needs at least {config.min_source_images} images, got {n}"
            )

        bottleneck = CONTENT_LAYER
        size = tuple(source_images.shape[-2:])
        style_layers = encoder.style_layers
        logger.info(
            "Training AdaIN decoder",
            extra={"seed": seed, "images": n, "style_augmented": config.style_augmented},
        )
        history: List[ReconstructionRecord] = []
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            decoder = AdainDecoder(encoder.channels, LAYER_IDS.index(bottleneck))
            generator = torch.Generator().manual_seed(seed)
            optimizer = make_optimizer(decoder.parameters(), config)
            batches = cycle_batches(n, config.batch_size, generator)

            decoder.train()
            for iteration in progress(config.iterations, "decoder"):
                x = source_images[next(batches)]
                with torch.no_grad():
                    f = self.features.extract(x, encoder, [bottleneck])[bottleneck]
                reconstruction = F.mse_loss(decoder(f, size), x)
                loss = reconstruction

                if config.style_augmented and x.shape[0] > 1:
                    styles = x.roll(1, dims=0)
                    with torch.no_grad():
                        style_feats = self.features.extract(styles, encoder, style_layers)
                        t = self.adain(f, style_feats[bottleneck], config.epsilon)
                    stylized = decoder(t, size)
                    out = self.features.extract(stylized, encoder, style_layers)
                    content = F.mse_loss(out[bottleneck], t)
                    style = self.features.style_loss(out, style_feats)
                    loss = loss + config.style_weight * (content + style)

                check_finite(loss, iteration)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                history.append(ReconstructionRecord(iteration=iteration, loss=reconstruction.item()))
        decoder.eval()

        model = EncoderDecoder(
            encoder=encoder,
            decoder=decoder,
            bottleneck_layer=bottleneck,
            epsilon=config.epsilon,
            config=config,
            history=history,
        )
        initial, final = model.reconstruction_progress()
        logger.info(
            "AdaIN decoder trained",
            extra={"initial_loss": initial, "final_loss": final},
        )
        return model

    def reconstruct(self, image: torch.Tensor, model: EncoderDecoder) -> torch.Tensor:
        """decoder(encode(x)) without any statistic transfer."""
        batch = self.features.validate_images(image)
        layer = model.bottleneck_layer
        with torch.no_grad():
            f = self.features.encode(batch, model.encoder, [layer])[layer]
            out = model.decoder(f, tuple(batch.shape[-2:])).clamp(0.0, 1.0)
        return out[0] if image.dim() == 3 else out

    def stylize(
        self, content: torch.Tensor, style: torch.Tensor, model: EncoderDecoder
    ) -> torch.Tensor:
        """decoder(adain(encode(content), encode(style))), shape preserved, in [0, 1]."""
        content_batch = self.features.validate_images(content)
        style_batch = self.features.validate_images(style)
        layer = model.bottleneck_layer
        model.decoder.eval()
        with torch.no_grad():
            fc = self.features.encode(content_batch, model.encoder, [layer])[layer]
            fs = self.features.encode(style_batch, model.encoder, [layer])[layer]
            t = self.adain(fc, fs, model.epsilon)
            out = model.decoder(t, tuple(content_batch.shape[-2:])).clamp(0.0, 1.0)
        return out[0] if content.dim() == 3 else out

    def save_model(self, model: EncoderDecoder, path: Union[str, Path], seed: int) -> Path:
        state = {f"encoder.{k}": v for k, v in model.encoder.state_dict().items()}
        state.update({f"decoder.{k}": v for k, v in model.decoder.state_dict().items()})
        return self.checkpoints.write(
            path,
            "decoder",
            state,
            architecture=model.encoder.architecture(),
            tap_set=model.encoder.tap_set,
            bottleneck_layer=model.bottleneck_layer,
            epsilon=model.epsilon,
            seed=seed,
            config=model.config.model_dump(mode="json") if model.config else None,
            history=[record.model_dump() for record in model.history],
        )

    def load_model(self, path: Union[str, Path]) -> EncoderDecoder:
        header, state = self.checkpoints.load(path, kind="decoder")
        channels = header["architecture"]["channels"]
        layer = header["bottleneck_layer"]
        encoder = PerceptualEncoder(channels)
        encoder.load_state_dict(
            {k[len("encoder."):]: v for k, v in state.items() if k.startswith("encoder.")}
        )
        decoder = AdainDecoder(channels, LAYER_IDS.index(layer))
        decoder.load_state_dict(
            {k[len("decoder."):]: v for k, v in state.items() if k.startswith("decoder.")}
        )
        decoder.eval()
        config = header.get("config")
        return EncoderDecoder(
            encoder=encoder.freeze(),
            decoder=decoder,
            bottleneck_layer=layer,
            epsilon=header["epsilon"],
            config=DecoderTrainConfig.model_validate(config) if config else None,
            history=[ReconstructionRecord.model_validate(r) for r in header.get("history", [])],
        )


# Global adain transfer service instance
adain_transfer_service = AdainTransferService()
