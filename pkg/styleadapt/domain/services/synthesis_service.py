"""Synthetic source modality: style-transferred copies that keep source labels."""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch

from styleadapt.core.exceptions import ConfigurationError, DomainError
from styleadapt.core.logging import get_logger
from styleadapt.domain.models import (
    EncoderDecoder,
    LabeledDataset,
    Modality,
    Sample,
    TransformNetwork,
    UnlabeledPool,
)
from styleadapt.domain.services.adain_transfer_service import (
    AdainTransferService,
    adain_transfer_service,
)
from styleadapt.domain.services.johnson_transfer_service import (
    JohnsonTransferService,
    johnson_transfer_service,
)
from styleadapt.infrastructure.storage import (
    ImageRepository,
    TableRepository,
    image_repository,
    table_repository,
)

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.csv"


class SynthesisService:
    """Builds the labeled synthetic dataset and writes it to disk."""

    def __init__(
        self,
        johnson: Optional[JohnsonTransferService] = None,
        adain: Optional[AdainTransferService] = None,
        images: Optional[ImageRepository] = None,
        tables: Optional[TableRepository] = None,
    ) -> None:
        self.johnson = johnson or johnson_transfer_service
        self.adain = adain or adain_transfer_service
        self.images = images or image_repository
        self.tables = tables or table_repository

    def load_networks(self, paths: Sequence[Union[str, Path]]) -> List[TransformNetwork]:
        """Load transfer network checkpoints (missing file → ArtifactIOError)."""
        return [self.johnson.load_network(path) for path in paths]

    @staticmethod
    def _synthetic(sample: Sample, path: Path, style: str) -> Sample:
        return Sample(
            path=str(path),
            label=sample.label,
            modality=Modality.SYNTHETIC,
            split=sample.split,
            origin_path=sample.path,
            style_path=style,
        )

    def build_synthetic_johnson(
        self,
        source: LabeledDataset,
        networks: Sequence[TransformNetwork],
        out_dir: Union[str, Path],
        batch_size: int = 32,
    ) -> LabeledDataset:
        """
        Apply every network to every source image.

        Output order is source-major: the |networks| copies of a source image
        are consecutive. Each copy keeps its origin's label and split and
        records the network's style image id.

        Raises:
            ConfigurationError: If no network is given
            DomainError: If the source dataset is empty
        """
        if not networks:
            raise ConfigurationError("build_synthetic_johnson needs at least one network")
        if len(source) == 0:
            raise DomainError("Source dataset is empty")
        out_dir = Path(out_dir)

        logger.info(
            "Building johnson synthetic modality",
            extra={"sources": len(source), "networks": len(networks)},
        )
        samples: List[Sample] = []
        for start in range(0, len(source), batch_size):
            chunk = source.samples[start : start + batch_size]
            batch = self.images.load_batch([s.path for s in chunk])
            outputs = [self.johnson.apply_transfer(net, batch) for net in networks]
            for offset, sample in enumerate(chunk):
                index = start + offset
                for j, network in enumerate(networks):
                    path = out_dir / "images" / f"{index:06d}_n{j:02d}.png"
                    self.images.save(outputs[j][offset], path)
                    samples.append(self._synthetic(sample, path, network.style_image_id))

        return self._finish(source, samples, out_dir)

    def build_synthetic_adain(
        self,
        source: LabeledDataset,
        target_pool: UnlabeledPool,
        model: EncoderDecoder,
        out_dir: Union[str, Path],
        styles_per_image: int = 10,
        seed: int = 0,
    ) -> LabeledDataset:
        """
        Stylize each source image towards ``styles_per_image`` pool images.

        Style images are drawn uniformly with replacement, independently per
        source image, from a generator seeded with ``seed``.

        Raises:
            ConfigurationError: If the target pool is empty or
                styles_per_image < 1
            DomainError: If the source dataset is empty
        """
        if len(target_pool) == 0:
            raise ConfigurationError("build_synthetic_adain needs a non-empty target pool")
        if styles_per_image < 1:
            raise ConfigurationError("styles_per_image must be at least 1")
        if len(source) == 0:
            raise DomainError("Source dataset is empty")
        out_dir = Path(out_dir)

        draws = self.draw_styles(len(source), len(target_pool), styles_per_image, seed)
        logger.info(
            "Building adain synthetic modality",
            extra={
                "sources": len(source),
                "styles_per_image": styles_per_image,
                "pool_size": len(target_pool),
                "distinct_styles": int(np.unique(draws).size),
            },
        )
        cache: Dict[Tuple[int, Tuple[int, int]], torch.Tensor] = {}

        def _style(i: int, size: Tuple[int, int]) -> torch.Tensor:
            if (i, size) not in cache:
                cache[(i, size)] = self.images.load(target_pool.paths[i], size=size)
            return cache[(i, size)]

        samples: List[Sample] = []
        for index, sample in enumerate(source.samples):
            content = self.images.load(sample.path)
            size = tuple(content.shape[-2:])
            styles = torch.stack([_style(int(i), size) for i in draws[index]])
            contents = content.unsqueeze(0).expand(styles_per_image, -1, -1, -1)
            outputs = self.adain.stylize(contents, styles, model)
            for j, style_index in enumerate(draws[index]):
                path = out_dir / "images" / f"{index:06d}_s{j:02d}.png"
                self.images.save(outputs[j], path)
                samples.append(
                    self._synthetic(sample, path, target_pool.paths[int(style_index)])
                )

        return self._finish(source, samples, out_dir)

    @staticmethod
    def draw_styles(n_sources: int, pool_size: int, styles_per_image: int, seed: int) -> np.ndarray:
        """n_sources × styles_per_image pool indices, uniform with replacement."""
        rng = np.random.default_rng(seed)
        return rng.integers(0, pool_size, size=(n_sources, styles_per_image))

    def _finish(
        self, source: LabeledDataset, samples: List[Sample], out_dir: Path
    ) -> LabeledDataset:
        dataset = LabeledDataset(class_names=list(source.class_names), samples=samples)
        self.tables.save_dataset(dataset, out_dir / MANIFEST_NAME)
        logger.info(
            "Synthetic modality written",
            extra={"samples": len(dataset), "manifest": str(out_dir / MANIFEST_NAME)},
        )
        return dataset


# Global synthesis service instance
synthesis_service = SynthesisService()
