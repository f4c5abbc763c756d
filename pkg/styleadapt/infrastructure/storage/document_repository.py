"""JSON documents: style representatives, reports and the artifact manifest."""

from pathlib import Path
from typing import Type, TypeVar

from pydantic import BaseModel, ValidationError

from styleadapt.core.exceptions import ArtifactIOError
from styleadapt.infrastructure.storage.base_repository import BaseFileRepository, PathLike

ModelT = TypeVar("ModelT", bound=BaseModel)


class DocumentRepository(BaseFileRepository[BaseModel]):
    """Pydantic model ⇄ JSON file."""

    def __init__(self) -> None:
        super().__init__("document")

    def save(self, item: BaseModel, path: PathLike) -> Path:
        path = self.prepare(path)
        path.write_text(item.model_dump_json(indent=2), encoding="utf-8")
        return path

    def load(self, path: PathLike, model_class: Type[ModelT]) -> ModelT:  # type: ignore[override]
        """Read a JSON document and validate it as ``model_class``."""
        path = self.require(path)
        try:
            return model_class.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as e:
            raise ArtifactIOError(
                f"Invalid {model_class.__name__} document {path}",
                details={"errors": e.errors(include_url=False)},
            ) from e


document_repository = DocumentRepository()
