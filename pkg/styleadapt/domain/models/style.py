"""Style selection domain models."""

from typing import List, Optional

import numpy as np
from pydantic import Field

from .common import Schema


class PcaProjection(Schema):
    """Centering vector and principal directions of a descriptor matrix."""

    mean: np.ndarray = Field(..., description="Per-dimension mean removed before projection")
    components: np.ndarray = Field(
        ..., description="n_components × dim basis, rows ordered by variance"
    )
    explained_variance: np.ndarray = Field(..., description="Variance per component")
    explained_variance_ratio: np.ndarray = Field(
        ..., description="Fraction of total variance per component"
    )

    @property
    def n_components(self) -> int:
        return int(self.components.shape[0])

    def project(self, descriptors: np.ndarray) -> np.ndarray:
        return (np.asarray(descriptors, dtype=np.float64) - self.mean) @ self.components.T

    def reconstruct(self, reduced: np.ndarray) -> np.ndarray:
        return np.asarray(reduced, dtype=np.float64) @ self.components + self.mean


class StyleClusters(Schema):
    """k-means result over style descriptors (row-aligned with the pool)."""

    centroids: np.ndarray = Field(..., description="k × d centroid matrix")
    labels: List[int] = Field(..., description="Cluster index per pool row")
    distances: List[float] = Field(
        ..., description="Euclidean distance of each row to its own centroid"
    )
    inertia: float = Field(..., ge=0)
    n_iter: int = Field(..., ge=0)
    empty_clusters: List[int] = Field(default_factory=list)

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])


class StyleRepresentative(Schema):
    """One chosen style exemplar."""

    cluster_index: int = Field(..., ge=0)
    image_id: str
    distance: float = Field(..., ge=0, description="Distance to the cluster centroid")
    cluster_size: int = Field(..., ge=1)


class StyleRepresentatives(Schema):
    """The k target images used as transfer styles."""

    entries: List[StyleRepresentative] = Field(default_factory=list)
    k: int = Field(..., ge=1, description="Number of clusters requested")
    strategy: str = Field(default="cluster", description="cluster or random")
    pool_size: int = Field(default=0, ge=0)
    seed: Optional[int] = None
    warnings: List[str] = Field(default_factory=list)

    @property
    def image_ids(self) -> List[str]:
        return [entry.image_id for entry in self.entries]
