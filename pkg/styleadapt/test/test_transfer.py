"""Feed-forward (Johnson) and statistic-matching (AdaIN) style transfer."""

import pytest
import torch

from styleadapt.core.exceptions import (
    ConfigurationError,
    ContractViolationError,
    DomainError,
)
from styleadapt.domain.models import DecoderTrainConfig, TransferTrainConfig
from styleadapt.domain.networks import PerceptualEncoder
from styleadapt.domain.services import (
    adain_transfer_service,
    channel_stats,
    johnson_transfer_service,
)


def transfer_config(**overrides) -> TransferTrainConfig:
    values = dict(iterations=40, batch_size=4, min_source_images=8, learning_rate=1e-2, width=8)
    values.update(overrides)
    return TransferTrainConfig(**values)


def decoder_config(**overrides) -> DecoderTrainConfig:
    values = dict(iterations=30, batch_size=4, min_source_images=8, learning_rate=1e-2)
    values.update(overrides)
    return DecoderTrainConfig(**values)


class TestAdain:
    def test_output_takes_style_statistics(self):
        generator = torch.Generator().manual_seed(0)
        for _ in range(100):
            content = 5 * torch.randn(8, 6, 6, generator=generator, dtype=torch.float64) + 1
            style = 2 * torch.randn(8, 5, 7, generator=generator, dtype=torch.float64) - 3
            out = adain_transfer_service.adain(content, style, epsilon=1e-5)
            out_mean, out_std = channel_stats(out)
            style_mean, style_std = channel_stats(style)
            torch.testing.assert_close(out_mean, style_mean, rtol=1e-5, atol=1e-8)
            torch.testing.assert_close(out_std, style_std, rtol=1e-5, atol=1e-8)

    def test_single_style_broadcasts_over_batch(self):
        out = adain_transfer_service.adain(torch.randn(4, 3, 5, 5), torch.randn(1, 3, 6, 6))
        assert out.shape == (4, 3, 5, 5)

    def test_constant_content_stays_finite(self):
        out = adain_transfer_service.adain(torch.ones(3, 4, 4), torch.randn(3, 4, 4))
        assert torch.isfinite(out).all()

    def test_non_positive_epsilon(self):
        with pytest.raises(ConfigurationError):
            adain_transfer_service.adain(torch.randn(3, 4, 4), torch.randn(3, 4, 4), epsilon=0.0)

    def test_channel_mismatch(self):
        with pytest.raises(DomainError):
            adain_transfer_service.adain(torch.randn(3, 4, 4), torch.randn(5, 4, 4))


class TestJohnsonTransfer:
    def test_training_reduces_style_loss(self, encoder, images):
        network = johnson_transfer_service.train_transfer_network(
            images, images[0], encoder, transfer_config(), style_image_id="style-0"
        )
        initial, final = network.style_loss_progress(window=5)
        assert final < initial
        assert len(network.history) == 40
        assert network.style_image_id == "style-0"

    def test_output_is_a_valid_image_of_the_same_size(self, encoder, images):
        network = johnson_transfer_service.train_transfer_network(
            images, images[1], encoder, transfer_config(iterations=2)
        )
        batch = johnson_transfer_service.apply_transfer(network, images)
        single = johnson_transfer_service.apply_transfer(network, images[0])
        assert batch.shape == images.shape
        assert single.shape == images[0].shape
        assert batch.min() >= 0 and batch.max() <= 1

    def test_vanishing_style_weight_leaves_content_loss(self, encoder, images):
        network = johnson_transfer_service.train_transfer_network(
            images, images[2], encoder, transfer_config(iterations=3, lambda_t=1e-8)
        )
        for record in network.history:
            assert record.total_loss == pytest.approx(record.content_loss, abs=1e-6)

    def test_history_records_without_grad_warnings(self, encoder, images, recwarn):
        johnson_transfer_service.train_transfer_network(
            images, images[0], encoder, transfer_config(iterations=2)
        )
        adain_transfer_service.train_decoder(images, encoder, decoder_config(iterations=2), seed=0)
        assert not [w for w in recwarn if "requires_grad" in str(w.message)]

    def test_same_seed_same_network(self, encoder, images):
        config = transfer_config(iterations=3, seed=4)
        a = johnson_transfer_service.train_transfer_network(images, images[0], encoder, config)
        b = johnson_transfer_service.train_transfer_network(images, images[0], encoder, config)
        for (name, x), (_, y) in zip(
            a.network.state_dict().items(), b.network.state_dict().items()
        ):
            assert torch.equal(x, y), name

    def test_too_few_source_images(self, encoder, images):
        with pytest.raises(ConfigurationError):
            johnson_transfer_service.train_transfer_network(
                images[:4], images[0], encoder, transfer_config(min_source_images=8)
            )

    def test_unfrozen_encoder(self, images):
        with pytest.raises(ContractViolationError):
            johnson_transfer_service.train_transfer_network(
                images, images[0], PerceptualEncoder([4, 8, 8, 8]), transfer_config()
            )

    def test_checkpoint_reload(self, encoder, images, tmp_path):
        network = johnson_transfer_service.train_transfer_network(
            images, images[0], encoder, transfer_config(iterations=2), style_image_id="s"
        )
        path = johnson_transfer_service.save_network(network, tmp_path / "net.ckpt")
        loaded = johnson_transfer_service.load_network(path)
        assert loaded.style_image_id == "s"
        assert len(loaded.history) == 2
        torch.testing.assert_close(
            johnson_transfer_service.apply_transfer(loaded, images),
            johnson_transfer_service.apply_transfer(network, images),
        )


class TestAdainDecoder:
    def test_training_reduces_reconstruction_loss(self, encoder, toy_images):
        model = adain_transfer_service.train_decoder(
            toy_images, encoder, decoder_config(iterations=60), seed=0
        )
        initial, final = model.reconstruction_progress(window=10)
        assert final < initial
        assert model.bottleneck_layer == "block3"

    def test_style_augmented_variant_trains(self, encoder, images):
        model = adain_transfer_service.train_decoder(
            images, encoder, decoder_config(iterations=3, style_augmented=True), seed=0
        )
        assert len(model.history) == 3

    def test_stylize_and_reconstruct_keep_shape(self, encoder, images):
        model = adain_transfer_service.train_decoder(
            images, encoder, decoder_config(iterations=2), seed=0
        )
        stylized = adain_transfer_service.stylize(images[:3], images[3:6], model)
        assert stylized.shape == (3, 3, 32, 32)
        assert stylized.min() >= 0 and stylized.max() <= 1
        assert adain_transfer_service.stylize(images[0], images[1], model).shape == (3, 32, 32)
        assert adain_transfer_service.reconstruct(images[0], model).shape == (3, 32, 32)

    def test_too_few_source_images(self, encoder, images):
        with pytest.raises(ConfigurationError):
            adain_transfer_service.train_decoder(images[:4], encoder, decoder_config(), seed=0)

    def test_checkpoint_reload(self, encoder, images, tmp_path):
        model = adain_transfer_service.train_decoder(
            images, encoder, decoder_config(iterations=2), seed=0
        )
        path = adain_transfer_service.save_model(model, tmp_path / "decoder.ckpt", seed=0)
        loaded = adain_transfer_service.load_model(path)
        torch.testing.assert_close(
            adain_transfer_service.stylize(images[0], images[1], loaded),
            adain_transfer_service.stylize(images[0], images[1], model),
        )
