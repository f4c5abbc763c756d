"""Dual-head training with gradient-reversed modality confusion, and evaluation."""

from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F
from sklearn.metrics import confusion_matrix

from styleadapt.core.exceptions import (
    ConfigurationError,
    ContractViolationError,
    DomainError,
)
from styleadapt.core.logging import get_logger
from styleadapt.core.utils import deterministic_mode, fingerprint, state_dict_fingerprint
from styleadapt.domain.models import (
    AdaptConfig,
    AdaptLogRecord,
    AdaptModel,
    EvalReport,
    LabeledDataset,
    ModalityReport,
    Split,
)
from styleadapt.domain.networks import DualHeadClassifier
from styleadapt.domain.networks import grad_reverse as _grad_reverse
from styleadapt.domain.services.training_utils import check_finite, cycle_batches, progress
from styleadapt.infrastructure.storage import (
    CheckpointRepository,
    ImageRepository,
    checkpoint_repository,
    image_repository,
)

logger = get_logger(__name__)

REAL, SYNTHETIC = 0, 1


class AdaptBatch(NamedTuple):
    """Images with object labels and modality tags (0 real, 1 synthetic)."""

    images: torch.Tensor
    labels: torch.Tensor
    modality: torch.Tensor


class AdaptLoss(NamedTuple):
    """Reported loss terms and the objective that is back-propagated.

    ``total`` is α·L_d + β·L_y. ``objective`` has the same gradient for θ_F
    and θ_Y, while the modality head receives its own descent term.
    """

    total: torch.Tensor
    object_loss: torch.Tensor
    modality_loss: torch.Tensor
    objective: torch.Tensor


class Prediction(NamedTuple):
    label: int
    probabilities: np.ndarray


class AdaptService:
    """Service for the adaptation classifier: training, prediction, evaluation."""

    def __init__(
        self,
        images: Optional[ImageRepository] = None,
        checkpoints: Optional[CheckpointRepository] = None,
    ) -> None:
        self.images = images or image_repository
        self.checkpoints = checkpoints or checkpoint_repository

    @staticmethod
    def grad_reverse(features: torch.Tensor) -> torch.Tensor:
        """Identity forward, gradient × −1 backward."""
        return _grad_reverse(features)

    @staticmethod
    def adapt_loss(
        batch: AdaptBatch,
        model: Union[AdaptModel, DualHeadClassifier],
        alpha: float,
        beta: float,
        modality_head_weight: float = 1.0,
    ) -> AdaptLoss:
        """
        Cross-entropy object and modality losses of one mixed batch.

        Back-propagating ``objective`` makes θ_Y descend β·L_y, θ_F descend
        β·L_y while ascending α·L_d through the reversal, and θ_D descend
        L_d at ``modality_head_weight``.

        Raises:
            ContractViolationError: If the batch holds a single modality or
                an object label outside the vocabulary
        """
        network = model.network if isinstance(model, AdaptModel) else model
        tags = set(batch.modality.tolist())
        if tags != {REAL, SYNTHETIC}:
            raise ContractViolationError(
                "adapt_loss needs real and synthetic samples in the batch",
                details={"modalities": sorted(tags)},
            )
        if batch.labels.min() < 0 or batch.labels.max() >= network.num_classes:
            raise ContractViolationError("object label outside the class vocabulary")

        out = network(batch.images, reverse=True)
        object_loss = F.cross_entropy(out.object_logits, batch.labels)
        modality_loss = F.cross_entropy(out.modality_logits, batch.modality)
        total = alpha * modality_loss + beta * object_loss

        # θ_D descends L_d at modality_head_weight whatever alpha is.
        head_only = F.cross_entropy(
            network.modality_head(out.features.detach()), batch.modality
        )
        objective = beta * object_loss + (modality_head_weight - alpha) * head_only
        if alpha != 0:
            objective = objective + alpha * modality_loss
        return AdaptLoss(total, object_loss, modality_loss, objective)

    def train_adapt(
        self,
        real: LabeledDataset,
        synthetic: LabeledDataset,
        config: AdaptConfig,
    ) -> Tuple[AdaptModel, List[AdaptLogRecord]]:
        """
        Train on the train splits of the real and synthetic modalities.

        Raises:
            ConfigurationError: If the class vocabularies differ
            DomainError: If either train split is empty
            TrainingDivergenceError: If the loss becomes NaN or infinite
        """
        if list(real.class_names) != list(synthetic.class_names):
            raise ConfigurationError(
                "Real and synthetic datasets use different class vocabularies",
                details={"real": real.class_names, "synthetic": synthetic.class_names},
            )
        real_train = real.subset(split=Split.TRAIN)
        synthetic_train = synthetic.subset(split=Split.TRAIN)
        if len(real_train) == 0 or len(synthetic_train) == 0:
            raise DomainError("train_adapt needs non-empty real and synthetic train splits")

        real_x = self.images.load_batch(real_train.paths())
        synth_x = self.images.load_batch(synthetic_train.paths(), size=tuple(real_x.shape[-2:]))
        return self.fit(
            real_x,
            torch.tensor(real_train.labels()),
            synth_x,
            torch.tensor(synthetic_train.labels()),
            list(real.class_names),
            config,
        )

    def train_photo_only(
        self, real: LabeledDataset, config: AdaptConfig
    ) -> Tuple[AdaptModel, List[AdaptLogRecord]]:
        """Same trainer on the real train split only, without the modality branch."""
        real_train = real.subset(split=Split.TRAIN)
        if len(real_train) == 0:
            raise DomainError("photo-only training needs a non-empty real train split")
        config = config.model_copy(update={"alpha": 0.0, "use_modality_head": False})
        model, log = self.fit(
            self.images.load_batch(real_train.paths()),
            torch.tensor(real_train.labels()),
            None,
            None,
            list(real.class_names),
            config,
        )
        model.method = "photo-only"
        return model, log

    def fit(
        self,
        real_images: torch.Tensor,
        real_labels: torch.Tensor,
        synthetic_images: Optional[torch.Tensor],
        synthetic_labels: Optional[torch.Tensor],
        class_names: List[str],
        config: AdaptConfig,
    ) -> Tuple[AdaptModel, List[AdaptLogRecord]]:
        """
        SGD-momentum training loop over in-memory tensors.

        With synthetic data every batch is half real, half synthetic; without
        it batches are all real and only the object loss is used. Learning
        rate decays by ``lr_decay_gamma`` every ``lr_step`` iterations.
        """
        real_labels = real_labels.long()
        with_synthetic = synthetic_images is not None
        use_head = config.use_modality_head and with_synthetic
        half = config.batch_size // 2 if with_synthetic else config.batch_size

        logger.info(
            "Training adaptation classifier",
            extra={
                "seed": config.seed,
                "alpha": config.alpha,
                "beta": config.beta,
                "real": int(real_images.shape[0]),
                "synthetic": int(synthetic_images.shape[0]) if with_synthetic else 0,
                "iterations": config.max_iterations,
            },
        )
        log: List[AdaptLogRecord] = []
        with torch.random.fork_rng(devices=[]), deterministic_mode(config.deterministic):
            torch.manual_seed(config.seed)
            network = DualHeadClassifier(len(class_names), config.channels, config.fc_dim)
            real_stream = cycle_batches(
                real_images.shape[0], half, torch.Generator().manual_seed(config.seed)
            )
            if with_synthetic:
                synthetic_labels = synthetic_labels.long()
                synthetic_stream = cycle_batches(
                    synthetic_images.shape[0],
                    half,
                    torch.Generator().manual_seed(config.seed + 1),
                )
            optimizer = torch.optim.SGD(
                network.parameters(), lr=config.learning_rate, momentum=config.momentum
            )
            scheduler = torch.optim.lr_scheduler.StepLR(
                optimizer, step_size=config.lr_step, gamma=config.lr_decay_gamma
            )

            network.train()
            for iteration in progress(config.max_iterations, "adapt"):
                r = next(real_stream)
                images, labels = real_images[r], real_labels[r]
                synthetic_count = 0
                if with_synthetic:
                    s = next(synthetic_stream)
                    images = torch.cat([images, synthetic_images[s]])
                    labels = torch.cat([labels, synthetic_labels[s]])
                    synthetic_count = half
                modality = torch.cat(
                    [
                        torch.full((half,), REAL, dtype=torch.long),
                        torch.full((synthetic_count,), SYNTHETIC, dtype=torch.long),
                    ]
                )
                batch = AdaptBatch(images, labels, modality)

                if use_head:
                    terms = self.adapt_loss(
                        batch, network, config.alpha, config.beta, config.modality_head_weight
                    )
                    objective, object_loss, modality_loss = (
                        terms.objective,
                        terms.object_loss,
                        terms.modality_loss.item(),
                    )
                    total = terms.total.item()
                else:
                    out = network(images, reverse=False)
                    object_loss = F.cross_entropy(out.object_logits, labels)
                    objective = config.beta * object_loss
                    modality_loss = 0.0
                    if with_synthetic:
                        modality_loss = F.cross_entropy(out.modality_logits, modality).item()
                    total = objective.item() + config.alpha * modality_loss

                check_finite(objective, iteration)
                lr = optimizer.param_groups[0]["lr"]
                optimizer.zero_grad()
                objective.backward()
                optimizer.step()
                scheduler.step()

                log.append(
                    AdaptLogRecord(
                        iteration=iteration,
                        object_loss=object_loss.item(),
                        modality_loss=modality_loss,
                        total_loss=total,
                        lr=lr,
                        real_count=half,
                        synthetic_count=synthetic_count,
                    )
                )
        network.eval()

        logger.info(
            "Adaptation classifier trained",
            extra={"final_object_loss": log[-1].object_loss, "final_modality_loss": log[-1].modality_loss},
        )
        model = AdaptModel(network=network, class_names=list(class_names), config=config)
        return model, log

    @staticmethod
    def predict_batch(model: AdaptModel, images: torch.Tensor) -> Tuple[np.ndarray, np.ndarray]:
        """Labels and float64 probability rows for a batch."""
        model.network.eval()
        with torch.no_grad():
            logits = torch.cat(
                [model.network(chunk, reverse=False).object_logits for chunk in images.split(256)]
            )
        probabilities = torch.softmax(logits.double(), dim=1)
        # argmax returns the first maximal index, i.e. the lowest class on ties
        labels = probabilities.argmax(dim=1)
        return labels.numpy(), probabilities.numpy()

    def predict(self, model: AdaptModel, image: torch.Tensor) -> Prediction:
        """Predicted class and probability vector of one 3×H×W image."""
        labels, probabilities = self.predict_batch(model, image.unsqueeze(0))
        return Prediction(int(labels[0]), probabilities[0])

    def evaluate(
        self, model: AdaptModel, target_test: LabeledDataset, method: Optional[str] = None
    ) -> EvalReport:
        """
        Top-1 evaluation on a labeled test set (used for evaluation only).

        Raises:
            DomainError: If the test set is empty
        """
        if len(target_test) == 0:
            raise DomainError("Cannot evaluate on an empty test set")
        if list(target_test.class_names) != list(model.class_names):
            raise ConfigurationError("Test set vocabulary differs from the model's")
        images = self.images.load_batch(target_test.paths())
        return self.evaluate_arrays(
            model, images, torch.tensor(target_test.labels()), method=method
        )

    def evaluate_arrays(
        self,
        model: AdaptModel,
        images: torch.Tensor,
        labels: torch.Tensor,
        method: Optional[str] = None,
    ) -> EvalReport:
        if images.shape[0] == 0:
            raise DomainError("Cannot evaluate on an empty test set")
        predicted, _ = self.predict_batch(model, images)
        truth = labels.numpy()
        n_classes = len(model.class_names)
        matrix = confusion_matrix(truth, predicted, labels=list(range(n_classes)))
        row_totals = matrix.sum(axis=1)
        per_class = {
            name: (float(matrix[i, i] / row_totals[i]) if row_totals[i] else None)
            for i, name in enumerate(model.class_names)
        }
        report = EvalReport(
            method=method or model.method,
            top1_accuracy=float(np.trace(matrix) / matrix.sum()),
            per_class_accuracy=per_class,
            confusion_matrix=matrix.tolist(),
            class_names=list(model.class_names),
            sample_count=int(matrix.sum()),
            model_fingerprint=state_dict_fingerprint(model.network.state_dict()),
            config_fingerprint=fingerprint(model.config),
        )
        logger.info(
            "Evaluation complete",
            extra={"method": report.method, "top1": report.top1_accuracy, "samples": report.sample_count},
        )
        return report

    def evaluate_modality(
        self, model: AdaptModel, real: torch.Tensor, synthetic: torch.Tensor
    ) -> ModalityReport:
        """Held-out accuracy of the modality head on real vs synthetic images."""
        if real.shape[0] == 0 or synthetic.shape[0] == 0:
            raise DomainError("evaluate_modality needs both real and synthetic images")
        model.network.eval()
        with torch.no_grad():
            images = torch.cat([real, synthetic])
            truth = torch.cat(
                [
                    torch.full((real.shape[0],), REAL),
                    torch.full((synthetic.shape[0],), SYNTHETIC),
                ]
            )
            logits = torch.cat(
                [model.network(chunk, reverse=False).modality_logits for chunk in images.split(256)]
            )
        accuracy = float((logits.argmax(dim=1) == truth).double().mean())
        return ModalityReport(
            accuracy=accuracy, real_count=int(real.shape[0]), synthetic_count=int(synthetic.shape[0])
        )

    def save_model(self, model: AdaptModel, path: Union[str, Path]) -> Path:
        return self.checkpoints.write(
            path,
            "adapt",
            model.network.state_dict(),
            architecture=model.network.architecture(),
            class_names=list(model.class_names),
            method=model.method,
            seed=model.config.seed,
            config=model.config.model_dump(mode="json"),
        )

    def load_model(self, path: Union[str, Path]) -> AdaptModel:
        header, state = self.checkpoints.load(path, kind="adapt")
        architecture = header["architecture"]
        network = DualHeadClassifier(
            architecture["num_classes"], architecture["channels"], architecture["fc_dim"]
        )
        network.load_state_dict(state)
        network.eval()
        return AdaptModel(
            network=network,
            class_names=header["class_names"],
            config=AdaptConfig.model_validate(header["config"]),
            method=header.get("method", "adapted"),
        )


# Global adapt service instance
adapt_service = AdaptService()
