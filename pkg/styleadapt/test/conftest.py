"""Shared fixtures: tiny encoders, small toy domains and random images."""

from pathlib import Path

import pytest
import torch

from styleadapt.core.config import settings
from styleadapt.domain.models import ToyDomainSpec
from styleadapt.domain.services import feature_service, toy_domain_service
from styleadapt.infrastructure.storage import image_repository

TINY_CHANNELS = [4, 8, 8, 8]


@pytest.fixture(autouse=True)
def _quiet_progress(monkeypatch):
    monkeypatch.setattr(settings, "show_progress", False)


@pytest.fixture
def encoder():
    return feature_service.build_perceptual_encoder(seed=0, channels=TINY_CHANNELS)


@pytest.fixture
def images():
    generator = torch.Generator().manual_seed(0)
    return torch.rand(12, 3, 32, 32, generator=generator)


@pytest.fixture(scope="session")
def toy_spec():
    return ToyDomainSpec(
        classes=["circle", "square", "triangle"],
        image_size=32,
        source_samples_per_class=40,
        target_samples_per_class=10,
    )


@pytest.fixture(scope="session")
def toy_domains(tmp_path_factory, toy_spec):
    out_dir: Path = tmp_path_factory.mktemp("toy")
    return toy_domain_service.generate_toy_domains(toy_spec, seed=3, out_dir=out_dir)


@pytest.fixture(scope="session")
def toy_images(toy_domains):
    return image_repository.load_batch(toy_domains.source.paths()[:24])
