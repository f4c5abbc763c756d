"""CSV tables: sample manifests and training logs."""

from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ValidationError

from styleadapt.core.exceptions import DataError
from styleadapt.core.logging import get_logger
from styleadapt.domain.models import ClassVocabulary, LabeledDataset
from styleadapt.infrastructure.storage.base_repository import BaseFileRepository, PathLike

logger = get_logger(__name__)

MANIFEST_COLUMNS = ["path", "label", "modality", "split", "origin_path", "style_path"]


class TableRepository(BaseFileRepository[pd.DataFrame]):
    """pandas-backed CSV persistence."""

    def __init__(self) -> None:
        super().__init__("table")

    def save(self, item: pd.DataFrame, path: PathLike) -> Path:
        path = self.prepare(path)
        item.to_csv(path, index=False)
        return path

    def load(self, path: PathLike) -> pd.DataFrame:
        path = self.require(path)
        try:
            return pd.read_csv(path, dtype=str, keep_default_na=False)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise DataError(f"Unreadable CSV {path}: {e}", details={"path": str(path)}) from e

    def save_records(self, records: Iterable[BaseModel], path: PathLike) -> Path:
        """Write pydantic records as rows (one column per field)."""
        rows = [record.model_dump(mode="json") for record in records]
        return self.save(pd.DataFrame(rows), path)

    def save_dataset(self, dataset: LabeledDataset, path: PathLike) -> Path:
        """Write a sample manifest with labels stored as class names.

        Image paths under the manifest directory are stored relative to it,
        anything else as an absolute path.
        """
        base = Path(path).parent.resolve()

        def _portable(value: Optional[str]) -> str:
            if not value:
                return ""
            resolved = Path(value).resolve()
            try:
                return resolved.relative_to(base).as_posix()
            except ValueError:
                return str(resolved)

        frame = pd.DataFrame(
            [
                {
                    "path": _portable(s.path),
                    "label": dataset.class_names[s.label],
                    "modality": s.modality.value,
                    "split": s.split.value,
                    "origin_path": _portable(s.origin_path),
                    "style_path": s.style_path or "",
                }
                for s in dataset.samples
            ],
            columns=MANIFEST_COLUMNS,
        )
        saved = self.save(frame, path)
        vocabulary = ClassVocabulary(class_names=list(dataset.class_names))
        self.vocabulary_path(saved).write_text(vocabulary.model_dump_json(), encoding="utf-8")
        return saved

    @staticmethod
    def vocabulary_path(path: PathLike) -> Path:
        """Sidecar holding the class order of a manifest."""
        path = Path(path)
        return path.with_name(f"{path.stem}.classes.json")

    def load_vocabulary(self, path: PathLike) -> Optional[List[str]]:
        """Class order saved next to a manifest, or None for hand-written manifests."""
        sidecar = self.vocabulary_path(path)
        if not sidecar.is_file():
            return None
        try:
            return ClassVocabulary.model_validate_json(sidecar.read_text(encoding="utf-8")).class_names
        except ValidationError as e:
            raise DataError(f"Invalid class vocabulary {sidecar}", details={"path": str(sidecar)}) from e

    def load_dataset(
        self, path: PathLike, class_names: Optional[Sequence[str]] = None
    ) -> LabeledDataset:
        """Read a manifest written by ``save_dataset``.

        Relative image paths resolve against the manifest's directory. The
        class vocabulary defaults to the saved class order, then to the sorted
        label names present.
        """
        frame = self.load(path)
        missing = [c for c in ("path", "label") if c not in frame.columns]
        if missing:
            raise DataError(f"Manifest {path} lacks columns {missing}")
        base = Path(path).parent
        names: List[str] = list(class_names or self.load_vocabulary(path) or sorted(set(frame["label"])))
        index = {name: i for i, name in enumerate(names)}
        unknown = [i + 2 for i, label in enumerate(frame["label"]) if label not in index]
        if unknown:
            raise DataError(
                f"Manifest {path} has labels outside the vocabulary", details={"rows": unknown}
            )

        def _resolve(value: str) -> Optional[str]:
            if not value:
                return None
            p = Path(value)
            return str(p if p.is_absolute() else base / p)

        samples = []
        for row in frame.to_dict(orient="records"):
            samples.append(
                {
                    "path": _resolve(row["path"]),
                    "label": index[row["label"]],
                    "modality": row.get("modality") or "real",
                    "split": row.get("split") or "train",
                    "origin_path": _resolve(row.get("origin_path", "")),
                    "style_path": row.get("style_path") or None,
                }
            )
        try:
            return LabeledDataset(class_names=names, samples=samples)
        except ValidationError as e:
            raise DataError(
                f"Invalid manifest {path}", details={"errors": e.errors(include_url=False)}
            ) from e


table_repository = TableRepository()
