"""Image I/O between PNG/JPEG files and float C×H×W tensors in [0, 1]."""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from styleadapt.core.exceptions import ArtifactIOError
from styleadapt.core.logging import get_logger
from styleadapt.infrastructure.storage.base_repository import BaseFileRepository, PathLike

logger = get_logger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class ImageRepository(BaseFileRepository[torch.Tensor]):
    """Reads RGB images as tensors and writes tensors as PNG."""

    def __init__(self) -> None:
        super().__init__("image")

    @staticmethod
    def is_image_file(path: PathLike) -> bool:
        return Path(path).suffix.lower() in IMAGE_SUFFIXES

    @staticmethod
    def to_tensor(image: Image.Image) -> torch.Tensor:
        array = np.asarray(image.convert("RGB"), dtype=np.float32) / 255.0
        return torch.from_numpy(array.copy()).permute(2, 0, 1).clamp_(0.0, 1.0)

    @staticmethod
    def to_pil(tensor: torch.Tensor) -> Image.Image:
        array = tensor.detach().cpu().clamp(0.0, 1.0).permute(1, 2, 0).numpy()
        return Image.fromarray(np.round(array * 255.0).astype(np.uint8))

    def load(self, path: PathLike, size: Optional[Tuple[int, int]] = None) -> torch.Tensor:
        """Read an image as a 3×H×W float tensor.

        Args:
            path: Image file path
            size: Optional (height, width) to resize to

        Raises:
            ArtifactIOError: If the file is missing or not a decodable image
        """
        path = self.require(path)
        try:
            with Image.open(path) as image:
                image.load()
                if size is not None:
                    image = image.resize((size[1], size[0]), Image.Resampling.BILINEAR)
                return self.to_tensor(image)
        except (UnidentifiedImageError, OSError) as e:
            raise ArtifactIOError(
                f"Unreadable image {path}: {e}", details={"path": str(path)}
            ) from e

    def is_readable(self, path: PathLike) -> bool:
        """Whether Pillow can fully decode the file."""
        try:
            with Image.open(path) as image:
                image.load()
            return True
        except (UnidentifiedImageError, OSError):
            return False

    def load_batch(
        self, paths: Sequence[PathLike], size: Optional[Tuple[int, int]] = None
    ) -> torch.Tensor:
        """Read images into one N×3×H×W tensor (resized to the first image's size)."""
        if not paths:
            return torch.empty(0, 3, 0, 0)
        images: List[torch.Tensor] = []
        for path in paths:
            image = self.load(path, size)
            if size is None:
                size = (int(image.shape[1]), int(image.shape[2]))
            images.append(image)
        return torch.stack(images)

    def save(self, tensor: torch.Tensor, path: PathLike) -> Path:
        """Write a 3×H×W tensor as a PNG (values clamped to [0, 1])."""
        path = self.prepare(path)
        self.to_pil(tensor).save(path, format="PNG")
        return path

    def save_pil(self, image: Image.Image, path: PathLike) -> Path:
        path = self.prepare(path)
        image.save(path, format="PNG")
        return path


image_repository = ImageRepository()
