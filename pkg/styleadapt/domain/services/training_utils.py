"""Helpers shared by the training loops."""

from typing import Iterable, Iterator

import torch
from tqdm import tqdm

from styleadapt.core.config import settings
from styleadapt.core.exceptions import TrainingDivergenceError
from styleadapt.domain.models import OptimizerName, OptimizerSettings


def make_optimizer(
    parameters: Iterable[torch.nn.Parameter], config: OptimizerSettings
) -> torch.optim.Optimizer:
    """Adam, or SGD with momentum, as the config selects."""
    if config.optimizer == OptimizerName.SGD:
        return torch.optim.SGD(
            parameters, lr=config.learning_rate, momentum=config.momentum
        )
    return torch.optim.Adam(parameters, lr=config.learning_rate)


def cycle_batches(n: int, batch_size: int, generator: torch.Generator) -> Iterator[torch.Tensor]:
    """Endless stream of index batches of exactly ``batch_size``.

    Indices come from successive seeded permutations of ``range(n)``; a batch
    that crosses an epoch boundary continues into the next permutation.
    """
    buffer = torch.empty(0, dtype=torch.long)
    while True:
        while buffer.numel() < batch_size:
            buffer = torch.cat([buffer, torch.randperm(n, generator=generator)])
        yield buffer[:batch_size]
        buffer = buffer[batch_size:]


def check_finite(loss: torch.Tensor, iteration: int, what: str = "loss") -> None:
    """Raise TrainingDivergenceError when a loss is NaN or infinite."""
    if not torch.isfinite(loss).all():
        raise TrainingDivergenceError(
            f"Training diverged: {what} is {loss.item()} at iteration {iteration}",
            iteration=iteration,
        )


def progress(iterations: int, desc: str) -> Iterable[int]:
    return tqdm(range(iterations), desc=desc, disable=not settings.show_progress, leave=False)
