"""Procedural two-domain shape datasets: same geometry, different rendering."""

import math
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from PIL import Image, ImageDraw

from styleadapt.core.exceptions import ConfigurationError
from styleadapt.core.logging import get_logger
from styleadapt.domain.models import (
    LabeledDataset,
    RenderStyle,
    Sample,
    Split,
    ToyDomains,
    ToyDomainSpec,
    UnlabeledPool,
)
from styleadapt.infrastructure.storage import (
    DocumentRepository,
    ImageRepository,
    TableRepository,
    document_repository,
    image_repository,
    table_repository,
)

logger = get_logger(__name__)

MIN_IMAGE_SIZE = 32
MIN_SOURCE_PER_CLASS = 40

Point = Tuple[float, float]


def shape_outline(shape: str, cx: float, cy: float, r: float, angle: float) -> List[Point]:
    """Closed polygon approximating a shape of radius r rotated by angle."""
    if shape == "circle":
        return [
            (cx + r * math.cos(2 * math.pi * i / 32), cy + r * math.sin(2 * math.pi * i / 32))
            for i in range(32)
        ]
    if shape == "square":
        polar = [(r, angle + math.pi / 4 + i * math.pi / 2) for i in range(4)]
    elif shape == "triangle":
        polar = [(r, angle - math.pi / 2 + i * 2 * math.pi / 3) for i in range(3)]
    elif shape == "star":
        polar = [
            (r if i % 2 == 0 else 0.45 * r, angle - math.pi / 2 + i * math.pi / 5)
            for i in range(10)
        ]
    elif shape == "cross":
        a, b = r, 0.35 * r
        corners = [
            (b, a), (b, b), (a, b), (a, -b), (b, -b), (b, -a),
            (-b, -a), (-b, -b), (-a, -b), (-a, b), (-b, b), (-b, a),
        ]
        cos, sin = math.cos(angle), math.sin(angle)
        return [(cx + x * cos - y * sin, cy + x * sin + y * cos) for x, y in corners]
    else:
        raise ConfigurationError(f"Unknown toy shape {shape!r}")
    return [(cx + rad * math.cos(t), cy + rad * math.sin(t)) for rad, t in polar]


def texture_mask(texture: str, size: int, phase: int) -> np.ndarray:
    """Boolean size×size mask of texture pixels."""
    y, x = np.mgrid[0:size, 0:size]
    if texture == "stripes":
        return ((x + y + phase) // 3) % 2 == 0
    if texture == "dots":
        return ((x + phase) % 4 < 2) & ((y + phase) % 4 < 2)
    if texture == "checker":
        return (((x + phase) // 3) + (y // 3)) % 2 == 0
    return np.zeros((size, size), dtype=bool)


class ToyDomainService:
    """Generates the desk-scale source and target domains."""

    def __init__(
        self,
        images: Optional[ImageRepository] = None,
        tables: Optional[TableRepository] = None,
        documents: Optional[DocumentRepository] = None,
    ) -> None:
        self.images = images or image_repository
        self.tables = tables or table_repository
        self.documents = documents or document_repository

    @staticmethod
    def sample_geometry(rng: np.random.Generator, size: int) -> Tuple[float, float, float, float]:
        """Center, radius and rotation, drawn identically for both domains."""
        cx, cy = rng.uniform(0.38, 0.62, size=2) * size
        r = rng.uniform(0.24, 0.34) * size
        angle = rng.uniform(0.0, 2 * math.pi)
        return float(cx), float(cy), float(r), float(angle)

    @staticmethod
    def render(
        shape: str,
        style: RenderStyle,
        geometry: Tuple[float, float, float, float],
        rng: np.random.Generator,
        size: int,
        noise_level: float,
    ) -> Image.Image:
        """Render one shape in a domain's style."""
        cx, cy, r, angle = geometry
        outline = shape_outline(shape, cx, cy, r, angle)

        background = np.asarray(style.background, dtype=np.float64)
        canvas = background + rng.normal(0.0, style.background_noise * 255.0, (size, size, 3))

        mask_image = Image.new("L", (size, size), 0)
        ImageDraw.Draw(mask_image).polygon(outline, fill=255)
        inside = np.asarray(mask_image) > 0

        if style.fill:
            color = np.asarray(style.palette[int(rng.integers(len(style.palette)))], dtype=np.float64)
            fill = np.broadcast_to(color, (size, size, 3)).copy()
            textured = texture_mask(style.texture, size, int(rng.integers(6)))
            fill[textured] = np.asarray(style.texture_color, dtype=np.float64)
            canvas[inside] = fill[inside]

        image = Image.fromarray(np.clip(canvas, 0, 255).astype(np.uint8))
        if style.stroke_width > 0:
            ImageDraw.Draw(image).line(
                outline + [outline[0]],
                fill=tuple(style.stroke_color),
                width=style.stroke_width,
                joint="curve",
            )

        pixels = np.asarray(image, dtype=np.float64)
        pixels = pixels + rng.normal(0.0, noise_level * 255.0, pixels.shape)
        return Image.fromarray(np.clip(np.round(pixels), 0, 255).astype(np.uint8))

    def generate_toy_domains(
        self, spec: ToyDomainSpec, seed: int, out_dir: Union[str, Path]
    ) -> ToyDomains:
        """
        Render the source and target domains and write them under ``out_dir``.

        Layout: ``source/<class>/*.png`` with ``source/manifest.csv``
        (90/10 train/test by default), ``target/pool/*.png`` (unlabeled,
        class-free file names, listed in ``target/pool.json``) and
        ``target/test/<class>/*.png`` with ``target/test_manifest.csv``.

        Raises:
            ConfigurationError: If fewer than two classes, an image size
                below 32 or fewer than 40 source samples per class are asked
        """
        if len(spec.classes) < 2:
            raise ConfigurationError("Toy domains need at least two classes")
        if spec.image_size < MIN_IMAGE_SIZE:
            raise ConfigurationError(
                f"Toy image size must be at least {MIN_IMAGE_SIZE}, got {spec.image_size}"
            )
        if spec.source_samples_per_class < MIN_SOURCE_PER_CLASS:
            raise ConfigurationError(
                f"Toy source needs at least {MIN_SOURCE_PER_CLASS} samples per class"
            )
        if spec.target_samples_per_class < 2:
            raise ConfigurationError("Toy target needs at least 2 samples per class")

        out_dir = Path(out_dir)
        source_rng, target_rng, split_rng = (
            np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
        )
        size = spec.image_size

        def _n_test(n: int) -> int:
            return min(n - 1, max(1, int(round(spec.test_fraction * n))))

        source_samples: List[Sample] = []
        for label, shape in enumerate(spec.classes):
            n = spec.source_samples_per_class
            test = set(split_rng.permutation(n)[: _n_test(n)].tolist())
            for i in range(n):
                image = self.render(
                    shape, spec.source_style, self.sample_geometry(source_rng, size),
                    source_rng, size, spec.noise_level,
                )
                path = self.images.save_pil(image, out_dir / "source" / shape / f"{shape}_{i:04d}.png")
                split = Split.TEST if i in test else Split.TRAIN
                source_samples.append(Sample(path=str(path), label=label, split=split))

        pool_images: List[Image.Image] = []
        test_samples: List[Sample] = []
        for label, shape in enumerate(spec.classes):
            n = spec.target_samples_per_class
            test = set(split_rng.permutation(n)[: _n_test(n)].tolist())
            for i in range(n):
                image = self.render(
                    shape, spec.target_style, self.sample_geometry(target_rng, size),
                    target_rng, size, spec.noise_level,
                )
                if i in test:
                    path = self.images.save_pil(
                        image, out_dir / "target" / "test" / shape / f"{shape}_{i:04d}.png"
                    )
                    test_samples.append(Sample(path=str(path), label=label, split=Split.TEST))
                else:
                    pool_images.append(image)

        pool_paths = []
        for k, j in enumerate(split_rng.permutation(len(pool_images)).tolist()):
            path = self.images.save_pil(pool_images[j], out_dir / "target" / "pool" / f"{k:06d}.png")
            pool_paths.append(str(path))

        classes = list(spec.classes)
        domains = ToyDomains(
            source=LabeledDataset(class_names=classes, samples=source_samples),
            target_pool=UnlabeledPool(paths=pool_paths),
            target_test=LabeledDataset(class_names=classes, samples=test_samples),
        )
        self.tables.save_dataset(domains.source, out_dir / "source" / "manifest.csv")
        self.tables.save_dataset(domains.target_test, out_dir / "target" / "test_manifest.csv")
        self.documents.save(domains.target_pool, out_dir / "target" / "pool.json")

        logger.info(
            "Toy domains generated",
            extra={
                "seed": seed,
                "classes": len(classes),
                "source": len(domains.source),
                "target_pool": len(domains.target_pool),
                "target_test": len(domains.target_test),
            },
        )
        return domains


# Global toy domain service instance
toy_domain_service = ToyDomainService()
