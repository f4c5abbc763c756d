"""Dataset domain models: labeled samples and the unlabeled target pool."""

from collections import Counter, defaultdict
from typing import Dict, List, Optional, Set

from pydantic import Field, model_validator

from .common import Modality, Schema, Split


class Sample(Schema):
    """One labeled image with its modality, split and provenance."""

    path: str = Field(..., description="Image file path")
    label: int = Field(..., ge=0, description="Index into the class vocabulary")
    modality: Modality = Field(default=Modality.REAL, description="Real or synthetic")
    split: Split = Field(default=Split.TRAIN, description="Train or test split")
    origin_path: Optional[str] = Field(
        None, description="Source image a synthetic sample was derived from"
    )
    style_path: Optional[str] = Field(
        None, description="Style image (or network style id) used for the transfer"
    )


class LabeledDataset(Schema):
    """Images with class labels, modality tags, split tags and provenance."""

    class_names: List[str] = Field(..., min_length=1, description="Class vocabulary")
    samples: List[Sample] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_samples(self) -> "LabeledDataset":
        n_classes = len(self.class_names)
        if len(set(self.class_names)) != n_classes:
            raise ValueError("class_names must be unique")
        for index, sample in enumerate(self.samples):
            if sample.label >= n_classes:
                raise ValueError(
                    f"sample {index} label {sample.label} outside vocabulary of size {n_classes}"
                )
            if sample.modality == Modality.SYNTHETIC and not sample.origin_path:
                raise ValueError(f"synthetic sample {index} has no origin_path")

        splits_by_origin: Dict[str, Set[Split]] = defaultdict(set)
        for sample in self.samples:
            splits_by_origin[sample.origin_path or sample.path].add(sample.split)
        leaked = sorted(origin for origin, splits in splits_by_origin.items() if len(splits) > 1)
        if leaked:
            raise ValueError(f"origin images in both train and test splits: {leaked[:5]}")
        return self

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def subset(
        self,
        split: Optional[Split] = None,
        modality: Optional[Modality] = None,
    ) -> "LabeledDataset":
        """Return the samples matching the given split and/or modality."""
        samples = [
            s
            for s in self.samples
            if (split is None or s.split == split)
            and (modality is None or s.modality == modality)
        ]
        return LabeledDataset(class_names=list(self.class_names), samples=samples)

    def paths(self) -> List[str]:
        return [s.path for s in self.samples]

    def labels(self) -> List[int]:
        return [s.label for s in self.samples]

    def class_histogram(self) -> Dict[str, int]:
        """Sample count per class name (every class present, zero if unused)."""
        counts = Counter(s.label for s in self.samples)
        return {name: counts.get(i, 0) for i, name in enumerate(self.class_names)}


class UnlabeledPool(Schema):
    """Target-domain images without any class annotation.

    Only paths are carried; nothing built from a pool can see target labels.
    """

    paths: List[str] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.paths)


class ToyDomains(Schema):
    """Output of the toy two-domain generator."""

    source: LabeledDataset
    target_pool: UnlabeledPool
    target_test: LabeledDataset


class ClassVocabulary(Schema):
    """Class order of a saved manifest; label indices refer to it."""

    class_names: List[str] = Field(..., min_length=1)
