"""Seed handling shared by every training and sampling stage."""

import random
from contextlib import contextmanager
from typing import Dict, Iterator

import numpy as np
import torch

# Fixed offsets so each pipeline stage draws from its own stream.
STAGE_SEED_OFFSETS: Dict[str, int] = {
    "data": 0,
    "encoder": 101,
    "styles": 202,
    "transfer": 303,
    "synthesis": 404,
    "adapt": 505,
    "baseline": 505,
    "evaluate": 606,
}


def derive_stage_seed(global_seed: int, stage: str) -> int:
    """Return the seed of a pipeline stage derived from the global seed.

    The baseline shares the adapt offset so both classifiers start from the
    same initialization.
    """
    return global_seed + STAGE_SEED_OFFSETS[stage]


def seed_everything(seed: int) -> torch.Generator:
    """Seed python, numpy and torch; return a torch generator on the seed."""
    random.seed(seed)
    np.random.seed(seed % (2**32))
    torch.manual_seed(seed)
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator


@contextmanager
def deterministic_mode(enabled: bool = True) -> Iterator[None]:
    """Temporarily force torch deterministic algorithms."""
    if not enabled:
        yield
        return
    previous = torch.are_deterministic_algorithms_enabled()
    torch.use_deterministic_algorithms(True)
    try:
        yield
    finally:
        torch.use_deterministic_algorithms(previous)
