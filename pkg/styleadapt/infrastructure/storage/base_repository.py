"""Base repository for file-backed artifacts."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, TypeVar, Union

from styleadapt.core.exceptions import ArtifactIOError
from styleadapt.core.logging import get_logger

T = TypeVar("T")
PathLike = Union[str, Path]

logger = get_logger(__name__)


class BaseRepositoryInterface(ABC, Generic[T]):
    """Base repository interface defining common operations."""

    @abstractmethod
    def save(self, item: T, path: PathLike) -> Path:
        """Persist an item and return the written path."""
        pass

    @abstractmethod
    def load(self, path: PathLike) -> T:
        """Load an item."""
        pass


class BaseFileRepository(BaseRepositoryInterface[T]):
    """File repository with path helpers shared by every artifact kind."""

    def __init__(self, kind: str) -> None:
        """Initialize base repository.

        Args:
            kind: Artifact kind used in log and error messages
        """
        self.kind = kind
        logger.debug(f"{self.__class__.__name__} initialized for {kind} artifacts")

    @staticmethod
    def prepare(path: PathLike) -> Path:
        """Create the parent directory of a path about to be written."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def require(self, path: PathLike) -> Path:
        """Return the path if it exists, otherwise raise ArtifactIOError."""
        path = Path(path)
        if not path.is_file():
            raise ArtifactIOError(
                f"Missing {self.kind} artifact: {path}", details={"path": str(path)}
            )
        return path
