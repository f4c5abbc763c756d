"""Global logging configuration.

Services log a short message plus structured fields passed through
``extra=``; the formatters below render those fields as ``key=value`` pairs
after the message. Console output goes to stderr so that CLI verbs can print
their results on stdout.
"""

import logging
import logging.config
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import colorlog

from styleadapt.core.config.settings import settings

DATE_FORMAT = "%H:%M:%S"
PLAIN_FORMAT = "%(asctime)s %(levelname)-7s %(name)s | %(message)s"
COLOR_FORMAT = "%(log_color)s%(asctime)s %(levelname)-7s%(reset)s %(name)s | %(message)s"
FILE_FORMAT = "%(asctime)s %(levelname)s %(name)s:%(funcName)s:%(lineno)d | %(message)s"
LEVEL_COLORS = {
    "DEBUG": "blue",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "red,bg_white",
}
LOG_FILE_BYTES = 5 * 1024 * 1024
LOG_FILE_BACKUPS = 3

# Attributes every LogRecord carries; anything else came in through ``extra``.
_RECORD_ATTRIBUTES = set(vars(logging.makeLogRecord({}))) | {"message", "asctime", "log_color"}


def record_fields(record: logging.LogRecord) -> Dict[str, Any]:
    """Structured fields attached to a record."""
    return {
        key: value
        for key, value in vars(record).items()
        if key not in _RECORD_ATTRIBUTES and not key.startswith("_")
    }


def _render_fields(record: logging.LogRecord) -> str:
    fields = record_fields(record)
    if not fields:
        return ""
    return " | " + " ".join(f"{key}={value}" for key, value in fields.items())


class FieldsFormatter(logging.Formatter):
    """Plain formatter that appends the record's structured fields."""

    def format(self, record: logging.LogRecord) -> str:
        return super().format(record) + _render_fields(record)


class ColoredFieldsFormatter(colorlog.ColoredFormatter):
    """Colored console formatter that appends the record's structured fields."""

    def format(self, record: logging.LogRecord) -> str:
        return super().format(record) + _render_fields(record)


def console_formatter_config(use_colors: bool, log_format: Optional[str]) -> Dict[str, Any]:
    if use_colors:
        return {
            "()": ColoredFieldsFormatter,
            "fmt": COLOR_FORMAT,
            "datefmt": DATE_FORMAT,
            "log_colors": LEVEL_COLORS,
        }
    return {"()": FieldsFormatter, "fmt": log_format or PLAIN_FORMAT, "datefmt": DATE_FORMAT}


def file_handler_config(log_file: str, log_level: str) -> Dict[str, Any]:
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)
    return {
        "class": "logging.handlers.RotatingFileHandler",
        "formatter": "file",
        "level": log_level,
        "filename": log_file,
        "maxBytes": LOG_FILE_BYTES,
        "backupCount": LOG_FILE_BACKUPS,
        "encoding": "utf-8",
    }


def build_logging_config(
    log_level: str,
    log_file: Optional[str],
    log_format: Optional[str],
    use_colors: bool,
) -> Dict[str, Any]:
    """dictConfig mapping with a stderr console handler and an optional file handler."""
    handlers: Dict[str, Any] = {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "console",
            "level": log_level,
            "stream": sys.stderr,
        }
    }
    if log_file:
        handlers["file"] = file_handler_config(log_file, log_level)

    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "console": console_formatter_config(use_colors, log_format),
            "file": {"()": FieldsFormatter, "fmt": FILE_FORMAT},
        },
        "handlers": handlers,
        "root": {"level": log_level, "handlers": list(handlers)},
        # Pillow logs every PNG chunk at DEBUG
        "loggers": {"PIL": {"level": "WARNING"}},
    }


class LoggerConfig:
    """Global logger configuration manager."""

    _initialized = False

    @classmethod
    def setup_logging(
        cls,
        log_level: str = "INFO",
        log_file: Optional[str] = None,
        log_format: Optional[str] = None,
        use_colors: bool = True,
        force: bool = False,
    ) -> None:
        """Configure the root logger once per process.

        Args:
            log_level: Root log level name
            log_file: Optional path of a rotating log file (never colored)
            log_format: Console format used when colors are disabled
            use_colors: Whether the console handler uses colorlog
            force: Reconfigure even if logging was already set up
        """
        if cls._initialized and not force:
            return
        logging.config.dictConfig(build_logging_config(log_level, log_file, log_format, use_colors))
        cls._initialized = True


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


LoggerConfig.setup_logging(
    log_level=settings.log_level,
    log_file=settings.log_file or None,
    use_colors=settings.log_colors,
)
