"""Dataset ingestion: labeled source/test sets and the unlabeled target pool."""

from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from styleadapt.core.exceptions import DataError
from styleadapt.core.logging import get_logger
from styleadapt.domain.models import LabeledDataset, Sample, Split, UnlabeledPool
from styleadapt.infrastructure.storage import (
    ImageRepository,
    TableRepository,
    image_repository,
    table_repository,
)

logger = get_logger(__name__)

PathLike = Union[str, Path]


class IngestResult(NamedTuple):
    dataset: LabeledDataset
    skipped: List[str]


class DatasetService:
    """Service turning folders and CSV manifests into validated datasets."""

    def __init__(
        self,
        images: Optional[ImageRepository] = None,
        tables: Optional[TableRepository] = None,
    ) -> None:
        self.images = images or image_repository
        self.tables = tables or table_repository

    def ingest_dataset(
        self, source: PathLike, class_names: Optional[Sequence[str]] = None
    ) -> LabeledDataset:
        """
        Load a class-per-subfolder directory or a ``path,label[,split]`` CSV.

        Samples are ordered lexicographically by path. Unreadable images are
        skipped with a warning.

        Args:
            source: Dataset root directory or CSV manifest
            class_names: Fixed vocabulary; defaults to the class order saved
                with the manifest, then to the sorted labels found

        Returns:
            LabeledDataset of real samples

        Raises:
            DataError: If the dataset is empty, the manifest repeats a path or
                uses a label outside ``class_names``
        """
        return self.scan_dataset(source, class_names).dataset

    def scan_dataset(
        self, source: PathLike, class_names: Optional[Sequence[str]] = None
    ) -> IngestResult:
        """Like ``ingest_dataset`` but also returns the skipped paths."""
        source = Path(source)
        if source.is_dir():
            records = self._scan_directory(source)
        elif source.is_file():
            class_names = class_names or self.tables.load_vocabulary(source)
            records = self._scan_manifest(source, class_names)
        else:
            raise DataError(f"Dataset not found: {source}")

        names = list(class_names) if class_names else sorted({label for _, label, _ in records})
        unknown = sorted({label for _, label, _ in records if label not in names})
        if unknown:
            raise DataError(f"Labels {unknown} are not in the class vocabulary")
        index = {name: i for i, name in enumerate(names)}

        samples: List[Sample] = []
        skipped: List[str] = []
        for path, label, split in sorted(records, key=lambda r: r[0]):
            if not self.images.is_readable(path):
                logger.warning("Skipping unreadable image", extra={"path": path})
                skipped.append(path)
                continue
            samples.append(Sample(path=path, label=index[label], split=split))

        if not samples:
            raise DataError(f"Dataset {source} contains no readable images")
        if skipped:
            logger.warning(
                "Unreadable images skipped", extra={"source": str(source), "skipped": len(skipped)}
            )
        dataset = LabeledDataset(class_names=names, samples=samples)
        logger.info(
            "Dataset ingested",
            extra={"source": str(source), "samples": len(dataset), "classes": dataset.num_classes},
        )
        return IngestResult(dataset, skipped)

    def _scan_directory(self, root: Path) -> List[Tuple[str, str, Split]]:
        records = []
        for class_dir in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
            for path in sorted(class_dir.rglob("*")):
                if path.is_file() and self.images.is_image_file(path):
                    records.append((str(path), class_dir.name, Split.TRAIN))
        if not records:
            raise DataError(f"No images found under {root}")
        return records

    def _scan_manifest(self, manifest: Path, class_names: Optional[Sequence[str]]) -> List[Tuple[str, str, Split]]:
        frame = self.tables.load(manifest)
        missing = [c for c in ("path", "label") if c not in frame.columns]
        if missing:
            raise DataError(f"Manifest {manifest} lacks columns {missing}")
        if frame.empty:
            raise DataError(f"Manifest {manifest} is empty")

        # data rows start on line 2, after the header
        duplicated = (frame.index[frame["path"].duplicated(keep=False)] + 2).tolist()
        if duplicated:
            raise DataError(
                f"Manifest {manifest} repeats image paths on rows {duplicated}",
                details={"rows": duplicated},
            )
        if class_names:
            bad = (frame.index[~frame["label"].isin(list(class_names))] + 2).tolist()
            if bad:
                raise DataError(
                    f"Manifest {manifest} has unknown labels on rows {bad}",
                    details={"rows": bad},
                )
        splits = frame["split"] if "split" in frame.columns else ["train"] * len(frame)
        valid_splits = {s.value for s in Split}
        bad_splits = [i + 2 for i, s in enumerate(splits) if (s or "train") not in valid_splits]
        if bad_splits:
            raise DataError(
                f"Manifest {manifest} has invalid split values on rows {bad_splits}",
                details={"rows": bad_splits},
            )

        base = manifest.parent
        records = []
        for path, label, split in zip(frame["path"], frame["label"], splits):
            p = Path(path)
            records.append((str(p if p.is_absolute() else base / p), label, Split(split or "train")))
        return records

    def ingest_target_pool(
        self, root: PathLike, limit: Optional[int] = None, seed: int = 0
    ) -> UnlabeledPool:
        """
        Collect the unlabeled target images under a directory (recursively).

        Only paths are returned. With ``limit`` a seeded subset of that size
        is kept, in path order.

        Raises:
            DataError: If no readable image is found
        """
        root = Path(root)
        if not root.is_dir():
            raise DataError(f"Target pool directory not found: {root}")
        paths = []
        for path in sorted(root.rglob("*")):
            if path.is_file() and self.images.is_image_file(path):
                if self.images.is_readable(path):
                    paths.append(str(path))
                else:
                    logger.warning("Skipping unreadable target image", extra={"path": str(path)})
        if not paths:
            raise DataError(f"No readable target images under {root}")
        return self.limit_pool(UnlabeledPool(paths=paths), limit, seed)

    @staticmethod
    def limit_pool(pool: UnlabeledPool, limit: Optional[int], seed: int) -> UnlabeledPool:
        """Keep a seeded subset of ``limit`` images (whole pool when smaller)."""
        if limit is None or limit >= len(pool):
            if limit is not None and limit > len(pool):
                logger.warning(
                    "Target pool smaller than requested limit",
                    extra={"pool_size": len(pool), "limit": limit},
                )
            return pool
        rng = np.random.default_rng(seed)
        keep = sorted(rng.choice(len(pool), size=limit, replace=False).tolist())
        return UnlabeledPool(paths=[pool.paths[i] for i in keep])


# Global dataset service instance
dataset_service = DatasetService()
