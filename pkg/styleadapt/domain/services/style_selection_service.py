"""Style selection: Gram descriptors → PCA → k-means → centroid-nearest images."""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from sklearn.cluster import KMeans
from sklearn.decomposition import PCA

from styleadapt.core.exceptions import (
    ConfigurationError,
    ContractViolationError,
    DomainError,
)
from styleadapt.core.logging import get_logger
from styleadapt.domain.models import (
    PcaProjection,
    SelectionConfig,
    StyleClusters,
    StyleRepresentative,
    StyleRepresentatives,
)
from styleadapt.domain.networks import PerceptualEncoder
from styleadapt.domain.services.feature_service import FeatureService, feature_service

logger = get_logger(__name__)

ImagePool = Union[torch.Tensor, Sequence[torch.Tensor]]


class StyleSelectionService:
    """Service distilling k style exemplars from an unlabeled image pool."""

    def __init__(self, features: Optional[FeatureService] = None) -> None:
        self.features = features or feature_service

    @staticmethod
    def descriptor_dimension(encoder: PerceptualEncoder) -> int:
        """Σ C(C+1)/2 over the style layers."""
        return sum(
            encoder.layer_channels(layer) * (encoder.layer_channels(layer) + 1) // 2
            for layer in encoder.style_layers
        )

    def compute_style_descriptors(
        self, pool: ImagePool, encoder: PerceptualEncoder, batch_size: int = 64
    ) -> np.ndarray:
        """
        One row per image: upper-triangular Gram entries of every style layer.

        Args:
            pool: N×3×H×W tensor, or a list of 3×H×W tensors (sizes may differ)
            encoder: Frozen perceptual encoder
            batch_size: Images encoded per forward pass for tensor pools

        Returns:
            float64 matrix of shape N × descriptor_dimension(encoder)

        Raises:
            DomainError: If the pool is empty
        """
        if len(pool) == 0:
            raise DomainError("Cannot compute style descriptors of an empty pool")

        if isinstance(pool, torch.Tensor):
            chunks = list(pool.split(batch_size))
        else:
            chunks = [image.unsqueeze(0) for image in pool]

        rows = []
        for chunk in chunks:
            stack = self.features.encode(chunk, encoder, encoder.style_layers)
            parts = []
            for layer in encoder.style_layers:
                values = self.features.gram(stack[layer].double()).values
                c = values.shape[-1]
                upper = torch.triu_indices(c, c)
                parts.append(values[:, upper[0], upper[1]])
            rows.append(torch.cat(parts, dim=1))
        return torch.cat(rows).numpy()

    @staticmethod
    def reduce_pca(
        descriptors: np.ndarray, n_components: int, allow_zero: bool = False
    ) -> Tuple[np.ndarray, PcaProjection]:
        """
        Center and project descriptors onto their top principal directions.

        Uses min(n_components, n_rows - 1, dim) components without whitening.
        Each component's sign is fixed so its largest-magnitude entry is
        positive.

        Raises:
            DomainError: If fewer than two rows are given, or all rows are
                identical and ``allow_zero`` is false
        """
        x = np.asarray(descriptors, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise DomainError("PCA needs at least two descriptor rows")
        n_rows, dim = x.shape
        mean = x.mean(axis=0)

        if np.all(np.ptp(x, axis=0) == 0):
            if not allow_zero:
                raise DomainError("Degenerate descriptors: all rows are identical")
            logger.warning("All style descriptors identical; using zero PCA components")
            empty = np.zeros((0, dim))
            projection = PcaProjection(
                mean=mean,
                components=empty,
                explained_variance=np.zeros(0),
                explained_variance_ratio=np.zeros(0),
            )
            return np.zeros((n_rows, 0)), projection

        effective = min(n_components, n_rows - 1, dim)
        pca = PCA(n_components=effective, svd_solver="full").fit(x)
        components = pca.components_.copy()
        pivots = components[np.arange(effective), np.argmax(np.abs(components), axis=1)]
        signs = np.where(pivots < 0, -1.0, 1.0)
        components *= signs[:, None]

        projection = PcaProjection(
            mean=pca.mean_,
            components=components,
            explained_variance=pca.explained_variance_,
            explained_variance_ratio=pca.explained_variance_ratio_,
        )
        logger.debug(
            "PCA reduced descriptors",
            extra={"requested": n_components, "effective": effective, "dim": dim},
        )
        return projection.project(x), projection

    @staticmethod
    def cluster_styles(
        reduced: np.ndarray,
        k: int,
        seed: int,
        max_iter: int = 100,
        tol: float = 1e-6,
    ) -> StyleClusters:
        """
        Lloyd k-means with k-means++ initialisation, run once per seed.

        Raises:
            ConfigurationError: If k ≤ 0 or k exceeds the number of rows
        """
        x = np.asarray(reduced, dtype=np.float64)
        n_rows = x.shape[0]
        if k <= 0 or k > n_rows:
            raise ConfigurationError(
                f"k must be in [1, {n_rows}], got {k}", details={"k": k, "rows": n_rows}
            )
        if x.ndim == 1 or x.shape[1] == 0:
            x = x.reshape(n_rows, -1) if x.size else np.zeros((n_rows, 1))

        kmeans = KMeans(
            n_clusters=k,
            init="k-means++",
            n_init=1,
            max_iter=max_iter,
            tol=tol,
            random_state=seed,
            algorithm="lloyd",
        ).fit(x)
        labels = kmeans.labels_.astype(int)
        centroids = kmeans.cluster_centers_
        distances = np.linalg.norm(x - centroids[labels], axis=1)
        empty = [j for j in range(k) if not np.any(labels == j)]

        return StyleClusters(
            centroids=centroids,
            labels=labels.tolist(),
            distances=distances.tolist(),
            inertia=float(kmeans.inertia_),
            n_iter=int(kmeans.n_iter_),
            empty_clusters=empty,
        )

    @staticmethod
    def select_representatives(
        clusters: StyleClusters, image_ids: Sequence[str]
    ) -> StyleRepresentatives:
        """Per non-empty cluster, the member nearest its centroid (ties: smallest id)."""
        if len(image_ids) != len(clusters.labels):
            raise ContractViolationError(
                "Clusters were computed over a different pool",
                details={"pool": len(image_ids), "clustered": len(clusters.labels)},
            )

        entries: List[StyleRepresentative] = []
        warnings: List[str] = []
        for j in range(clusters.k):
            members = [
                (clusters.distances[i], image_ids[i])
                for i, label in enumerate(clusters.labels)
                if label == j
            ]
            if not members:
                message = f"cluster {j} is empty; skipped"
                logger.warning(message)
                warnings.append(message)
                continue
            distance, image_id = min(members)
            entries.append(
                StyleRepresentative(
                    cluster_index=j,
                    image_id=image_id,
                    distance=float(distance),
                    cluster_size=len(members),
                )
            )

        return StyleRepresentatives(
            entries=entries, k=clusters.k, pool_size=len(image_ids), warnings=warnings
        )

    def select_styles(
        self,
        pool: ImagePool,
        image_ids: Sequence[str],
        encoder: PerceptualEncoder,
        k: int,
        seed: int,
        config: Optional[SelectionConfig] = None,
    ) -> StyleRepresentatives:
        """
        End-to-end style selection over a pool; k clamps to the pool size.

        With ``config.strategy == "random"`` k distinct pool images are drawn
        uniformly under the seed instead of clustering.
        """
        config = config or SelectionConfig()
        n = len(image_ids)
        if len(pool) != n:
            raise ContractViolationError("pool and image_ids differ in length")
        if n == 0:
            raise DomainError("Cannot select styles from an empty pool")
        if k <= 0:
            raise ConfigurationError(f"k must be positive, got {k}")
        effective_k = min(k, n)
        if effective_k < k:
            logger.info(
                "k clamped to pool size", extra={"requested_k": k, "pool_size": n}
            )

        if config.strategy == "random":
            rng = np.random.default_rng(seed)
            chosen = sorted(rng.choice(n, size=effective_k, replace=False).tolist())
            entries = [
                StyleRepresentative(
                    cluster_index=j, image_id=image_ids[i], distance=0.0, cluster_size=1
                )
                for j, i in enumerate(chosen)
            ]
            result = StyleRepresentatives(entries=entries, k=effective_k, pool_size=n)
        elif n == 1:
            only = StyleRepresentative(
                cluster_index=0, image_id=image_ids[0], distance=0.0, cluster_size=1
            )
            result = StyleRepresentatives(entries=[only], k=1, pool_size=1)
        else:
            descriptors = self.compute_style_descriptors(pool, encoder)
            if descriptors.shape[0] != n:
                raise ContractViolationError("descriptor count differs from pool size")
            reduced, _ = self.reduce_pca(descriptors, config.n_components, allow_zero=True)
            clusters = self.cluster_styles(
                reduced, effective_k, seed, max_iter=config.max_iter, tol=config.tol
            )
            result = self.select_representatives(clusters, image_ids)

        result.strategy = config.strategy
        result.seed = seed
        logger.info(
            "Style representatives selected",
            extra={
                "strategy": config.strategy,
                "k": effective_k,
                "pool_size": n,
                "selected": len(result.entries),
            },
        )
        return result


# Global style selection service instance
style_selection_service = StyleSelectionService()
