"""Style descriptors, PCA, k-means and representative selection."""

import itertools

import numpy as np
import pytest
import torch

from styleadapt.core.exceptions import ConfigurationError, DomainError
from styleadapt.domain.models import SelectionConfig, StyleClusters
from styleadapt.domain.services import style_selection_service

PALETTES = [(0.9, 0.1, 0.1), (0.1, 0.8, 0.2), (0.1, 0.2, 0.9)]


def palette_pool(per_palette: int, noise: float = 0.02, seed: int = 0):
    """Images whose only difference inside a palette is low-amplitude noise."""
    generator = torch.Generator().manual_seed(seed)
    images, palette_of = [], []
    for p, color in enumerate(PALETTES):
        base = torch.tensor(color).view(3, 1, 1).expand(3, 32, 32)
        for _ in range(per_palette):
            images.append((base + noise * torch.randn(3, 32, 32, generator=generator)).clamp(0, 1))
            palette_of.append(p)
    ids = [f"img_{i:03d}" for i in range(len(images))]
    return torch.stack(images), ids, palette_of


class TestDescriptors:
    def test_dimension_is_upper_triangle_of_every_style_layer(self, encoder):
        # channels 4, 8, 8, 8 → 10 + 36 + 36 + 36
        assert style_selection_service.descriptor_dimension(encoder) == 118

    def test_one_float64_row_per_image(self, encoder, images):
        descriptors = style_selection_service.compute_style_descriptors(images, encoder)
        assert descriptors.shape == (12, 118)
        assert descriptors.dtype == np.float64

    def test_list_pool_matches_tensor_pool(self, encoder, images):
        a = style_selection_service.compute_style_descriptors(images, encoder)
        b = style_selection_service.compute_style_descriptors(list(images), encoder)
        np.testing.assert_allclose(a, b, rtol=1e-5, atol=1e-9)

    def test_empty_pool_is_domain_error(self, encoder):
        with pytest.raises(DomainError):
            style_selection_service.compute_style_descriptors([], encoder)


class TestPca:
    def test_round_trip_and_variances_match_eigendecomposition(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(50, 20)) * np.linspace(1.0, 3.0, 20)
        reduced, projection = style_selection_service.reduce_pca(x, n_components=20)

        assert reduced.shape == (50, 20)
        np.testing.assert_allclose(projection.reconstruct(reduced), x, atol=1e-6)

        eigenvalues = np.sort(np.linalg.eigvalsh(np.cov(x, rowvar=False)))[::-1]
        np.testing.assert_allclose(projection.explained_variance, eigenvalues, rtol=1e-6)

    def test_sign_convention(self):
        rng = np.random.default_rng(1)
        _, projection = style_selection_service.reduce_pca(rng.normal(size=(30, 8)), 5)
        for row in projection.components:
            assert row[np.argmax(np.abs(row))] > 0

    def test_components_capped_by_rows(self):
        rng = np.random.default_rng(2)
        reduced, projection = style_selection_service.reduce_pca(rng.normal(size=(4, 30)), 1000)
        assert projection.n_components == 3
        assert reduced.shape == (4, 3)

    def test_identical_rows(self):
        x = np.ones((5, 4))
        with pytest.raises(DomainError):
            style_selection_service.reduce_pca(x, 2)
        reduced, projection = style_selection_service.reduce_pca(x, 2, allow_zero=True)
        assert reduced.shape == (5, 0)
        assert projection.n_components == 0


class TestKMeans:
    def test_matches_exhaustive_optimum_on_planted_clusters(self):
        rng = np.random.default_rng(3)
        points = np.vstack([rng.normal(0, 0.3, (6, 2)), rng.normal(5, 0.3, (5, 2))])
        n = len(points)

        best = np.inf
        for mask in itertools.product([0, 1], repeat=n - 1):
            labels = np.array((0,) + mask)
            if labels.min() == labels.max():
                continue
            cost = sum(
                ((points[labels == j] - points[labels == j].mean(axis=0)) ** 2).sum() for j in (0, 1)
            )
            best = min(best, cost)

        clusters = style_selection_service.cluster_styles(points, k=2, seed=0)
        assert clusters.inertia == pytest.approx(best, rel=1e-9)
        assert clusters.empty_clusters == []

    def test_same_seed_same_partition(self):
        x = np.random.default_rng(4).normal(size=(40, 3))
        a = style_selection_service.cluster_styles(x, k=4, seed=7)
        b = style_selection_service.cluster_styles(x, k=4, seed=7)
        assert a.labels == b.labels
        np.testing.assert_array_equal(a.centroids, b.centroids)

    @pytest.mark.parametrize("k", [0, 6])
    def test_invalid_k(self, k):
        with pytest.raises(ConfigurationError):
            style_selection_service.cluster_styles(np.zeros((5, 2)), k=k, seed=0)


class TestRepresentatives:
    def _clusters(self, labels, distances, k):
        return StyleClusters(
            centroids=np.zeros((k, 1)),
            labels=labels,
            distances=distances,
            inertia=0.0,
            n_iter=1,
        )

    def test_nearest_member_with_id_tie_break(self):
        clusters = self._clusters([0, 0, 1], [1.0, 1.0, 0.5], k=2)
        result = style_selection_service.select_representatives(clusters, ["b", "a", "c"])
        assert result.image_ids == ["a", "c"]
        assert [e.cluster_size for e in result.entries] == [2, 1]

    def test_empty_cluster_is_skipped_with_warning(self):
        clusters = self._clusters([0, 0, 1], [0.1, 0.2, 0.3], k=3)
        result = style_selection_service.select_representatives(clusters, ["a", "b", "c"])
        assert len(result.entries) == 2
        assert len(result.warnings) == 1


class TestSelectStyles:
    def test_recovers_planted_palettes(self, encoder):
        pool, ids, palette_of = palette_pool(per_palette=6)
        for seed in range(3):
            result = style_selection_service.select_styles(pool, ids, encoder, k=3, seed=seed)
            chosen = {palette_of[ids.index(image_id)] for image_id in result.image_ids}
            assert chosen == {0, 1, 2}

    def test_k_clamps_to_pool_size(self, encoder, images):
        ids = [f"t{i}" for i in range(4)]
        result = style_selection_service.select_styles(images[:4], ids, encoder, k=10, seed=0)
        assert result.k == 4
        assert sorted(result.image_ids) == ids

    def test_single_image_pool(self, encoder, images):
        result = style_selection_service.select_styles(images[:1], ["only"], encoder, k=3, seed=0)
        assert result.image_ids == ["only"]

    def test_random_strategy_is_seeded(self, encoder, images):
        ids = [f"t{i:02d}" for i in range(12)]
        config = SelectionConfig(strategy="random")
        a = style_selection_service.select_styles(images, ids, encoder, k=5, seed=1, config=config)
        b = style_selection_service.select_styles(images, ids, encoder, k=5, seed=1, config=config)
        assert a.image_ids == b.image_ids
        assert len(set(a.image_ids)) == 5
        assert a.strategy == "random"

    def test_empty_pool(self, encoder):
        with pytest.raises(DomainError):
            style_selection_service.select_styles(torch.empty(0, 3, 32, 32), [], encoder, k=2, seed=0)
