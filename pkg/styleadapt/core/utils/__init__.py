"""Shared utilities."""

from .hashing import fingerprint, sha256_file, state_dict_fingerprint
from .seeding import (
    STAGE_SEED_OFFSETS,
    derive_stage_seed,
    deterministic_mode,
    seed_everything,
)

__all__ = [
    "STAGE_SEED_OFFSETS",
    "derive_stage_seed",
    "deterministic_mode",
    "fingerprint",
    "seed_everything",
    "sha256_file",
    "state_dict_fingerprint",
]
