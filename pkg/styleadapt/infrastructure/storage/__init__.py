"""File-backed storage for images, checkpoints, tables and JSON documents."""

from .checkpoint_repository import (
    CHECKPOINT_FORMAT_VERSION,
    CheckpointRepository,
    checkpoint_repository,
)
from .document_repository import DocumentRepository, document_repository
from .image_repository import IMAGE_SUFFIXES, ImageRepository, image_repository
from .table_repository import MANIFEST_COLUMNS, TableRepository, table_repository

__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "CheckpointRepository",
    "DocumentRepository",
    "IMAGE_SUFFIXES",
    "ImageRepository",
    "MANIFEST_COLUMNS",
    "TableRepository",
    "checkpoint_repository",
    "document_repository",
    "image_repository",
    "table_repository",
]
