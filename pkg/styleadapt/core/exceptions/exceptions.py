"""Core exceptions module.

Every error raised by the library carries the process exit code the CLI
returns for it: 2 configuration, 3 data, 4 training divergence.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4


class BaseCustomException(Exception):
    """Base custom exception class."""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_UNEXPECTED,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class ConfigurationError(BaseCustomException):
    """Invalid configuration or parameter."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, exit_code=EXIT_CONFIG, details=details)


class DomainError(BaseCustomException):
    """Input outside an operation's mathematical domain (empty, mismatched)."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, exit_code=EXIT_DATA, details=details)


class DataError(BaseCustomException):
    """Dataset or manifest content is invalid."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, exit_code=EXIT_DATA, details=details)


class ArtifactIOError(BaseCustomException):
    """An artifact (checkpoint, manifest, image) is missing or unreadable."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, exit_code=EXIT_DATA, details=details)


class NumericError(BaseCustomException):
    """Non-finite values produced by a computation."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, exit_code=EXIT_DATA, details=details)


class ContractViolationError(BaseCustomException):
    """A caller broke an operation's precondition."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, exit_code=EXIT_DATA, details=details)


class TrainingDivergenceError(BaseCustomException):
    """Training loss became NaN or infinite."""

    def __init__(
        self,
        message: str,
        iteration: int,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.iteration = iteration
        details = {**(details or {}), "iteration": iteration}
        super().__init__(message, exit_code=EXIT_DIVERGENCE, details=details)


class StageFailedError(BaseCustomException):
    """A pipeline stage failed; partial artifacts are kept on disk."""

    def __init__(
        self,
        stage: str,
        cause: BaseException,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.stage = stage
        self.cause = cause
        exit_code = (
            cause.exit_code
            if isinstance(cause, BaseCustomException)
            else EXIT_UNEXPECTED
        )
        details = {**(details or {}), "stage": stage, "cause": str(cause)}
        super().__init__(
            f"Stage '{stage}' failed: {cause}", exit_code=exit_code, details=details
        )
