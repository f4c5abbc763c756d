"""Command line verbs and their exit codes."""

import json

import pytest
import torch

from styleadapt.core.config.settings import settings
from styleadapt.core.exceptions import EXIT_CONFIG, EXIT_DATA, EXIT_OK
from styleadapt.domain.services import johnson_transfer_service
from styleadapt.infrastructure.storage import image_repository
from styleadapt.interfaces.cli.main import main

TOY_TOML = """
[toy]
classes = ["circle", "square"]
image_size = 32
source_samples_per_class = 40
target_samples_per_class = 6

[transfer]
min_source_images = 8
batch_size = 4
"""


@pytest.fixture
def toy_config(tmp_path):
    path = tmp_path / "toy.toml"
    path.write_text(TOY_TOML)
    return path


def test_toygen_writes_domains(tmp_path, toy_config, capsys):
    out = tmp_path / "toy"
    assert main(["toygen", "--config", str(toy_config), "--out", str(out), "--seed", "1"]) == EXIT_OK
    assert (out / "source" / "manifest.csv").is_file()
    assert len(json.loads((out / "target" / "pool.json").read_text())["paths"]) == 2 * 5
    assert "target pool: 10 unlabeled images" in capsys.readouterr().out


def test_toygen_rejects_small_images(tmp_path, toy_config):
    code = main(
        ["toygen", "--config", str(toy_config), "--out", str(tmp_path / "t"), "--image-size", "16"]
    )
    assert code == EXIT_CONFIG


def test_encoder_then_styles_then_transfer(tmp_path, toy_config):
    out = tmp_path / "toy"
    assert main(["toygen", "--config", str(toy_config), "--out", str(out)]) == EXIT_OK
    encoder = tmp_path / "encoder.ckpt"
    assert main(
        ["train-encoder", "--source", str(out / "source" / "manifest.csv"),
         "--out", str(encoder), "--iterations", "2"]
    ) == EXIT_OK

    styles = tmp_path / "styles.json"
    assert main(
        ["select-styles", "--target-dir", str(out / "target" / "pool"), "--encoder", str(encoder),
         "--k", "3", "--limit", "8", "--out", str(styles)]
    ) == EXIT_OK
    representatives = json.loads(styles.read_text())
    assert representatives["pool_size"] == 8
    assert len(representatives["entries"]) == 3

    network = tmp_path / "net_01.ckpt"
    assert main(
        ["train-transfer", "--config", str(toy_config), "--style", str(styles), "--index", "1",
         "--source-dir", str(out / "source" / "manifest.csv"), "--encoder", str(encoder),
         "--iterations", "2", "--out", str(network)]
    ) == EXIT_OK
    trained = johnson_transfer_service.load_network(network)
    assert trained.style_image_id == representatives["entries"][1]["image_id"]

    assert main(
        ["train-transfer", "--style", str(styles), "--index", "3",
         "--source-dir", str(out / "source" / "manifest.csv"), "--out", str(network)]
    ) == EXIT_CONFIG


def test_run_with_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.toml")]) == EXIT_CONFIG


def test_run_requires_config():
    with pytest.raises(SystemExit) as excinfo:
        main(["run"])
    assert excinfo.value.code == 2


def test_evaluate_with_missing_model(tmp_path):
    code = main(
        ["evaluate", "--model", str(tmp_path / "absent.ckpt"), "--test", str(tmp_path)]
    )
    assert code == EXIT_DATA


def test_stylize_needs_a_transfer_model(tmp_path):
    content = image_repository.save(torch.rand(3, 32, 32), tmp_path / "a.png")
    code = main(
        ["stylize", "--content", str(content), "--out", str(tmp_path / "b.png")]
    )
    assert code == EXIT_CONFIG


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.strip() == f"{settings.app_name} {settings.app_version}"


def test_verbs_seed_global_generators(tmp_path):
    code = main(
        ["evaluate", "--model", str(tmp_path / "absent.ckpt"), "--test", str(tmp_path),
         "--seed", "7"]
    )
    assert code == EXIT_DATA
    assert torch.initial_seed() == 7
