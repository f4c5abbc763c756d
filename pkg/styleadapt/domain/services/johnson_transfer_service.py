"""Per-style feed-forward transfer networks."""

from pathlib import Path
from typing import List, Optional, Union

import torch

from styleadapt.core.exceptions import ConfigurationError, ContractViolationError
from styleadapt.core.logging import get_logger
from styleadapt.domain.models import (
    TransferLossRecord,
    TransferTrainConfig,
    TransformNetwork,
)
from styleadapt.domain.networks import PerceptualEncoder, TransformNet
from styleadapt.domain.services.feature_service import FeatureService, feature_service
from styleadapt.domain.services.training_utils import (
    check_finite,
    cycle_batches,
    make_optimizer,
    progress,
)
from styleadapt.infrastructure.storage import CheckpointRepository, checkpoint_repository

logger = get_logger(__name__)


class JohnsonTransferService:
    """Trains and applies one transformation network per style image."""

    def __init__(
        self,
        features: Optional[FeatureService] = None,
        checkpoints: Optional[CheckpointRepository] = None,
    ) -> None:
        self.features = features or feature_service
        self.checkpoints = checkpoints or checkpoint_repository

    def train_transfer_network(
        self,
        source_images: torch.Tensor,
        style_image: torch.Tensor,
        encoder: PerceptualEncoder,
        config: TransferTrainConfig,
        style_image_id: str = "style",
    ) -> TransformNetwork:
        """
        Train θ_t^j minimising λ_s·content_loss + λ_t·style_loss.

        Args:
            source_images: N×3×H×W source batch in [0, 1]
            style_image: 3×H×W style exemplar
            encoder: Frozen perceptual encoder supplying both losses
            config: Loss weights, optimizer and budget
            style_image_id: Pool id recorded on the network

        Returns:
            TransformNetwork with its per-iteration loss history

        Raises:
            ConfigurationError: If fewer than ``min_source_images`` are given
            ContractViolationError: If the encoder is not frozen
            TrainingDivergenceError: If the loss becomes NaN or infinite
        """
        if not encoder.frozen:
            raise ContractViolationError("transfer training requires a frozen encoder")
        source_images = self.features.validate_images(source_images)
        n = source_images.shape[0]
        if n < config.min_source_images:
            raise ConfigurationError(
                f"Transfer training needs at least {config.min_source_images} source images, got {n}"
            )

        content_layers = encoder.content_layers
        style_layers = encoder.style_layers
        wanted = list(dict.fromkeys(content_layers + style_layers))
        style_grams = self.features.style_grams(style_image, encoder)

        logger.info(
            "Training transfer network",
            extra={"style": style_image_id, "seed": config.seed, "images": n},
        )
        history: List[TransferLossRecord] = []
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(config.seed)
            network = TransformNet(config.width)
            generator = torch.Generator().manual_seed(config.seed)
            optimizer = make_optimizer(network.parameters(), config)
            batches = cycle_batches(n, config.batch_size, generator)

            network.train()
            for iteration in progress(config.iterations, f"transfer[{style_image_id}]"):
                x = source_images[next(batches)]
                y = network(x)
                out = self.features.extract(y, encoder, wanted)
                with torch.no_grad():
                    target = self.features.extract(x, encoder, content_layers)

                content = self.features.content_loss(
                    {layer: out[layer] for layer in content_layers}, target
                )
                style = self.features.style_loss_from_grams(
                    {layer: out[layer] for layer in style_layers}, style_grams
                )
                loss = config.lambda_s * content + config.lambda_t * style
                check_finite(loss, iteration)

                optimizer.zero_grad()
                loss.backward()
                optimizer.step()

                history.append(
                    TransferLossRecord(
                        iteration=iteration,
                        content_loss=content.item(),
                        style_loss=style.item(),
                        total_loss=loss.item(),
                    )
                )
                if iteration % 50 == 0:
                    logger.debug(
                        "transfer iteration",
                        extra={"iteration": iteration, "loss": loss.item()},
                    )
        network.eval()

        trained = TransformNetwork(
            network=network, style_image_id=style_image_id, config=config, history=history
        )
        initial, final = trained.style_loss_progress()
        logger.info(
            "Transfer network trained",
            extra={"style": style_image_id, "initial_style_loss": initial, "final_style_loss": final},
        )
        return trained

    def apply_transfer(self, network: TransformNetwork, image: torch.Tensor) -> torch.Tensor:
        """Transform an image (or batch); output has the input's shape, in [0, 1]."""
        batch = self.features.validate_images(image)
        network.network.eval()
        with torch.no_grad():
            out = network.network(batch).clamp(0.0, 1.0)
        return out[0] if image.dim() == 3 else out

    def save_network(self, network: TransformNetwork, path: Union[str, Path]) -> Path:
        return self.checkpoints.write(
            path,
            "transform",
            network.network.state_dict(),
            architecture={"name": "transform-net", "width": network.network.width},
            style_image_id=network.style_image_id,
            seed=network.config.seed,
            config=network.config.model_dump(mode="json"),
            history=[record.model_dump() for record in network.history],
        )

    def load_network(self, path: Union[str, Path]) -> TransformNetwork:
        header, state = self.checkpoints.load(path, kind="transform")
        net = TransformNet(header["architecture"]["width"])
        net.load_state_dict(state)
        net.eval()
        return TransformNetwork(
            network=net,
            style_image_id=header["style_image_id"],
            config=TransferTrainConfig.model_validate(header["config"]),
            history=[TransferLossRecord.model_validate(r) for r in header.get("history", [])],
        )


# Global johnson transfer service instance
johnson_transfer_service = JohnsonTransferService()
