"""Training configuration models and loss-history records."""

from typing import List, Optional

from pydantic import Field, field_validator, model_validator

from .common import OptimizerName, Schema

DEFAULT_CHANNELS = [16, 32, 64, 64]


class OptimizerSettings(Schema):
    """Optimizer fields shared by the training configs."""

    optimizer: OptimizerName = Field(default=OptimizerName.ADAM)
    learning_rate: float = Field(default=5e-3, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1, description="SGD momentum")


class EncoderTrainConfig(OptimizerSettings):
    """Hyperparameters for the desk-scale perceptual encoder."""

    channels: List[int] = Field(
        default_factory=lambda: list(DEFAULT_CHANNELS),
        description="Output channels of the four conv blocks",
    )
    iterations: int = Field(default=300, ge=1)
    batch_size: int = Field(default=32, ge=1)
    min_images_per_class: int = Field(default=20, ge=1)

    @field_validator("channels")
    @classmethod
    def _four_blocks(cls, value: List[int]) -> List[int]:
        if len(value) != 4 or any(c < 1 for c in value):
            raise ValueError("channels must list four positive block widths")
        return value


class SelectionConfig(Schema):
    """Style selection parameters (k is set on the pipeline config)."""

    n_components: int = Field(default=1000, ge=1, description="PCA components requested")
    strategy: str = Field(default="cluster", pattern="^(cluster|random)$")
    max_iter: int = Field(default=100, ge=1, description="Lloyd iteration cap")
    tol: float = Field(default=1e-6, ge=0, description="k-means convergence tolerance")


class TransferTrainConfig(OptimizerSettings):
    """Training setup of one Johnson transformation network."""

    lambda_s: float = Field(default=1.0, gt=0, description="Content (source) loss weight")
    lambda_t: float = Field(default=5.0, gt=0, description="Style (target) loss weight")
    iterations: int = Field(default=400, ge=1)
    batch_size: int = Field(default=8, ge=1)
    seed: int = 0
    min_source_images: int = Field(default=100, ge=1)
    smoothing_window: int = Field(default=50, ge=1)
    width: int = Field(default=16, ge=4, description="Channels of the first conv layer")


class DecoderTrainConfig(OptimizerSettings):
    """Training setup of the AdaIN decoder."""

    iterations: int = Field(default=400, ge=1)
    batch_size: int = Field(default=16, ge=1)
    min_source_images: int = Field(default=100, ge=1)
    epsilon: float = Field(default=1e-5, gt=0)
    style_augmented: bool = Field(
        default=False,
        description="Add AdaIN content and style losses to the reconstruction loss",
    )
    style_weight: float = Field(default=1.0, ge=0)
    smoothing_window: int = Field(default=50, ge=1)


class SynthesisConfig(Schema):
    """Synthetic modality construction settings."""

    batch_size: int = Field(default=32, ge=1)


class AdaptConfig(Schema):
    """Dual-head adaptation training configuration."""

    alpha: Optional[float] = Field(
        default=None, ge=0, description="Modality loss weight (defaults to beta / 10)"
    )
    beta: float = Field(default=1.0, gt=0, description="Object loss weight")
    batch_size: int = Field(default=64, ge=2)
    learning_rate: float = Field(default=1e-3, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    lr_decay_gamma: float = Field(default=0.1, gt=0, le=1)
    lr_step: Optional[int] = Field(
        default=None, ge=1, description="Iterations between decays (default 2/3 budget)"
    )
    max_iterations: int = Field(default=2000, ge=1)
    seed: int = 0
    deterministic: bool = True
    channels: List[int] = Field(default_factory=lambda: list(DEFAULT_CHANNELS))
    fc_dim: int = Field(default=64, ge=2)
    modality_head_weight: float = Field(
        default=1.0, ge=0, description="Rate at which the modality head descends L_d"
    )
    use_modality_head: bool = True

    @field_validator("batch_size")
    @classmethod
    def _even_batch(cls, value: int) -> int:
        if value % 2:
            raise ValueError("batch_size must be even so batches split 50/50")
        return value

    @model_validator(mode="after")
    def _fill_defaults(self) -> "AdaptConfig":
        if self.alpha is None:
            self.alpha = self.beta / 10.0
        if self.lr_step is None:
            self.lr_step = max(1, (2 * self.max_iterations) // 3)
        return self


class TransferLossRecord(Schema):
    iteration: int
    content_loss: float
    style_loss: float
    total_loss: float


class ReconstructionRecord(Schema):
    iteration: int
    loss: float


class AdaptLogRecord(Schema):
    """One row of the adaptation training log."""

    iteration: int
    object_loss: float
    modality_loss: float
    total_loss: float
    lr: float
    real_count: int
    synthetic_count: int
