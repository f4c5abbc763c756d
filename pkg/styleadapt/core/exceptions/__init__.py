"""Exceptions package."""

from .exceptions import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_DIVERGENCE,
    EXIT_OK,
    EXIT_UNEXPECTED,
    ArtifactIOError,
    BaseCustomException,
    ConfigurationError,
    ContractViolationError,
    DataError,
    DomainError,
    NumericError,
    StageFailedError,
    TrainingDivergenceError,
)

__all__ = [
    "EXIT_CONFIG",
    "EXIT_DATA",
    "EXIT_DIVERGENCE",
    "EXIT_OK",
    "EXIT_UNEXPECTED",
    "ArtifactIOError",
    "BaseCustomException",
    "ConfigurationError",
    "ContractViolationError",
    "DataError",
    "DomainError",
    "NumericError",
    "StageFailedError",
    "TrainingDivergenceError",
]
