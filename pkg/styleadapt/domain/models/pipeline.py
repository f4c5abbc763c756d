"""Pipeline and toy-domain configuration models."""

from typing import List, Optional, Tuple

from pydantic import Field, field_validator, model_validator

from .common import Schema, TransferMethod
from .training import (
    AdaptConfig,
    DecoderTrainConfig,
    EncoderTrainConfig,
    SelectionConfig,
    SynthesisConfig,
    TransferTrainConfig,
)

RGB = Tuple[int, int, int]

TOY_SHAPES = ("circle", "square", "triangle", "star", "cross")
TOY_TEXTURES = ("flat", "stripes", "dots", "checker")


class RenderStyle(Schema):
    """How a toy domain renders its shapes."""

    palette: List[RGB] = Field(..., min_length=1, description="Shape fill colors")
    background: RGB = Field(..., description="Background base color")
    background_noise: float = Field(default=0.05, ge=0, le=1)
    texture: str = Field(default="flat", description="Fill texture")
    texture_color: RGB = Field(default=(255, 255, 255))
    fill: bool = True
    stroke_width: int = Field(default=0, ge=0)
    stroke_color: RGB = Field(default=(0, 0, 0))

    @field_validator("texture")
    @classmethod
    def _known_texture(cls, value: str) -> str:
        if value not in TOY_TEXTURES:
            raise ValueError(f"texture must be one of {TOY_TEXTURES}")
        return value


def _default_source_style() -> RenderStyle:
    # Smooth saturated fills on a dark, lightly noisy background.
    return RenderStyle(
        palette=[(220, 60, 40), (240, 160, 30), (200, 40, 120), (250, 210, 60)],
        background=(40, 50, 70),
        background_noise=0.06,
        texture="flat",
        fill=True,
        stroke_width=0,
    )


def _default_target_style() -> RenderStyle:
    # Striped cool fills with dark ink outlines on light paper.
    return RenderStyle(
        palette=[(60, 120, 200), (40, 160, 140), (110, 90, 190)],
        background=(235, 225, 200),
        background_noise=0.10,
        texture="stripes",
        texture_color=(245, 245, 235),
        fill=True,
        stroke_width=2,
        stroke_color=(30, 30, 30),
    )


class ToyDomainSpec(Schema):
    """Procedural two-domain dataset: same shapes, different rendering."""

    classes: List[str] = Field(default_factory=lambda: list(TOY_SHAPES))
    source_style: RenderStyle = Field(default_factory=_default_source_style)
    target_style: RenderStyle = Field(default_factory=_default_target_style)
    image_size: int = Field(default=32, description="Square image side in pixels")
    source_samples_per_class: int = Field(default=100)
    target_samples_per_class: int = Field(default=200)
    noise_level: float = Field(default=0.05, ge=0, le=1, description="Pixel noise std")
    test_fraction: float = Field(default=0.1, gt=0, lt=1)

    @field_validator("classes")
    @classmethod
    def _known_shapes(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in TOY_SHAPES]
        if unknown:
            raise ValueError(f"unknown toy shapes {unknown}; choose from {TOY_SHAPES}")
        if len(set(value)) != len(value):
            raise ValueError("toy classes must be unique")
        return value


class PathsConfig(Schema):
    """Input locations and the working directory."""

    workdir: str = "workdir"
    source_dir: Optional[str] = Field(None, description="Class-per-subfolder source")
    source_manifest: Optional[str] = Field(None, description="CSV path,label,split")
    target_dir: Optional[str] = Field(None, description="Unlabeled target pool folder")
    target_test_manifest: Optional[str] = Field(
        None, description="Labeled target test CSV (evaluation only)"
    )


class PipelineConfig(Schema):
    """Full run configuration; one TOML table per section."""

    method: TransferMethod = TransferMethod.JOHNSON
    seed: int = 0
    k: int = Field(default=10, ge=1, description="Style representatives (johnson)")
    styles_per_image: int = Field(default=10, ge=1, description="Styles per image (adain)")
    target_pool_limit: Optional[int] = Field(
        None, ge=1, description="Use at most this many unlabeled target images"
    )
    run_baseline: bool = True
    paths: PathsConfig = Field(default_factory=PathsConfig)
    toy: Optional[ToyDomainSpec] = None
    encoder: EncoderTrainConfig = Field(default_factory=EncoderTrainConfig)
    selection: SelectionConfig = Field(default_factory=SelectionConfig)
    transfer: TransferTrainConfig = Field(default_factory=TransferTrainConfig)
    decoder: DecoderTrainConfig = Field(default_factory=DecoderTrainConfig)
    synthesis: SynthesisConfig = Field(default_factory=SynthesisConfig)
    adapt: AdaptConfig = Field(default_factory=AdaptConfig)

    @model_validator(mode="after")
    def _check_inputs(self) -> "PipelineConfig":
        if self.toy is None:
            has_source = bool(self.paths.source_dir or self.paths.source_manifest)
            if not (has_source and self.paths.target_dir and self.paths.target_test_manifest):
                raise ValueError(
                    "without a [toy] section, paths.source_dir or paths.source_manifest, "
                    "paths.target_dir and paths.target_test_manifest are required"
                )
        return self
