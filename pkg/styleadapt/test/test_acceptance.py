"""Desk-scale experiments on the toy domains (run with ``pytest -m slow``)."""

import statistics
from pathlib import Path

import numpy as np
import pytest
import torch

from styleadapt.domain.models import (
    DecoderTrainConfig,
    EncoderTrainConfig,
    PathsConfig,
    Split,
    TransferTrainConfig,
)
from styleadapt.domain.services import (
    adain_transfer_service,
    feature_service,
    johnson_transfer_service,
    load_pipeline_config,
    pipeline_service,
    style_selection_service,
)
from styleadapt.infrastructure.storage import image_repository

pytestmark = pytest.mark.slow

RESOURCES = Path(__file__).resolve().parents[1] / "resources"

SEEDS = [0, 1, 2, 3, 4]


def planted_palettes(n_palettes: int = 10, per_palette: int = 20, seed: int = 0):
    rng = np.random.default_rng(seed)
    colors = rng.uniform(0.05, 0.95, size=(n_palettes, 2, 3))
    generator = torch.Generator().manual_seed(seed)
    images, palette_of = [], []
    for p in range(n_palettes):
        stripes = (torch.arange(32) // 4 % 2).view(1, 1, 32).expand(3, 32, 32)
        first = torch.tensor(colors[p, 0], dtype=torch.float32).view(3, 1, 1)
        second = torch.tensor(colors[p, 1], dtype=torch.float32).view(3, 1, 1)
        base = torch.where(stripes.bool(), first, second)
        for _ in range(per_palette):
            noise = 0.03 * torch.randn(3, 32, 32, generator=generator)
            images.append((base + noise).clamp(0, 1))
            palette_of.append(p)
    return torch.stack(images), palette_of


class TestStyleRecovery:
    def test_representatives_cover_planted_palettes(self):
        pool, palette_of = planted_palettes()
        ids = [f"img_{i:03d}" for i in range(len(pool))]
        encoder = feature_service.build_perceptual_encoder(seed=0)

        hits = 0
        for seed in range(20):
            result = style_selection_service.select_styles(pool, ids, encoder, k=10, seed=seed)
            covered = {palette_of[ids.index(image_id)] for image_id in result.image_ids}
            hits += len(covered) >= 9
        assert hits >= 18


class TestTransferProgress:
    @pytest.fixture(scope="class")
    def trained_encoder(self, toy_domains):
        return feature_service.train_perceptual_encoder(
            toy_domains.source, EncoderTrainConfig(iterations=300), seed=0
        )

    def test_johnson_networks_halve_style_loss(self, toy_domains, trained_encoder):
        source = image_repository.load_batch(
            toy_domains.source.subset(split=Split.TRAIN).paths()
        )
        pool = image_repository.load_batch(toy_domains.target_pool.paths)
        representatives = style_selection_service.select_styles(
            pool, toy_domains.target_pool.paths, trained_encoder, k=3, seed=0
        )
        assert len(representatives.entries) == 3
        for j, style_id in enumerate(representatives.image_ids):
            network = johnson_transfer_service.train_transfer_network(
                source,
                image_repository.load(style_id),
                trained_encoder,
                TransferTrainConfig(seed=j),
                style_image_id=style_id,
            )
            initial, final = network.style_loss_progress()
            assert final <= 0.5 * initial, style_id

    def test_decoder_reconstruction_drops_to_a_quarter(self, toy_domains, trained_encoder):
        source = image_repository.load_batch(
            toy_domains.source.subset(split=Split.TRAIN).paths()
        )
        model = adain_transfer_service.train_decoder(
            source, trained_encoder, DecoderTrainConfig(), seed=0
        )
        initial, final = model.reconstruction_progress()
        assert final <= 0.25 * initial


class TestAdaptationGain:
    @pytest.fixture(scope="class")
    def runs(self, tmp_path_factory):
        base = load_pipeline_config(RESOURCES / "toy.toml")
        results = []
        for seed in SEEDS:
            workdir = tmp_path_factory.mktemp(f"seed{seed}")
            config = base.model_copy(
                update={"seed": seed, "paths": PathsConfig(workdir=str(workdir))}
            )
            adapted = pipeline_service.run_pipeline(config)
            no_confusion = pipeline_service.run_pipeline(
                config.model_copy(
                    update={"adapt": config.adapt.model_copy(update={"alpha": 0.0})}
                )
            )
            results.append((adapted, no_confusion))
        return results

    def test_pipeline_consumes_exactly_ten_target_images(self, runs):
        for adapted, _ in runs:
            assert adapted.report.target_pool_size == 10
            assert adapted.report.adapted.sample_count == 100

    def test_adapted_beats_photo_only_baseline(self, runs):
        gains = [adapted.report.gain for adapted, _ in runs]
        baselines = [adapted.report.baseline.top1_accuracy for adapted, _ in runs]
        assert statistics.median(gains) >= 0.10
        assert 0.3 <= statistics.median(baselines) <= 0.8

    def test_modality_head_is_confused_only_under_reversal(self, runs):
        confused = [adapted.report.modality.accuracy for adapted, _ in runs]
        separated = [no_confusion.report.modality.accuracy for _, no_confusion in runs]
        assert statistics.median(confused) <= 0.65
        assert statistics.median(separated) >= 0.9

    def test_zero_alpha_rerun_reuses_upstream_stages(self, runs):
        for _, no_confusion in runs:
            assert no_confusion.executed[0] == "adapt"
            assert "synthesis" in no_confusion.skipped
