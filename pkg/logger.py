"""
Structured logging configuration for the simulator.
Provides JSON logging for batch runs and colorized console logging for development.
"""

import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from pythonjsonlogger import jsonlogger

from config import settings


class JSONFormatter(jsonlogger.JsonFormatter):
    """
    JSON formatter for structured logging.
    Every record carries timestamp, level, logger and call-site fields;
    anything passed through ``extra=`` is merged at the top level.
    """

    def add_fields(self, log_record, record, message_dict):
        super().add_fields(log_record, record, message_dict)
        log_record["timestamp"] = datetime.now(timezone.utc).isoformat()
        log_record["level"] = record.levelname
        log_record["logger"] = record.name
        log_record["module"] = record.module
        log_record["function"] = record.funcName
        log_record["line"] = record.lineno


# attributes every LogRecord has; anything else arrived through extra=
_RECORD_FIELDS = frozenset(vars(logging.makeLogRecord({}))) | {"message", "asctime", "taskName"}


class ColoredFormatter(logging.Formatter):
    """
    Console formatter for interactive runs.
    Structured context (grid sizes, cutoffs, timings) follows the message as key=value.
    """

    LEVEL_COLORS = {
        'DEBUG': '\033[36m',
        'INFO': '\033[32m',
        'WARNING': '\033[33m',
        'ERROR': '\033[31m',
        'CRITICAL': '\033[35m',
    }
    RESET = '\033[0m'

    def format(self, record: logging.LogRecord) -> str:
        color = self.LEVEL_COLORS.get(record.levelname, self.RESET)
        timestamp = datetime.fromtimestamp(record.created).strftime('%H:%M:%S')
        context = " ".join(
            f"{key}={value}" for key, value in sorted(vars(record).items()) if key not in _RECORD_FIELDS
        )

        parts = [f"{color}[{record.levelname}]{self.RESET}", timestamp, record.name, record.getMessage()]
        if context:
            parts.append(context)
        formatted = " | ".join(parts)

        if record.exc_info:
            formatted += f"\n{self.formatException(record.exc_info)}"
        return formatted


def setup_logging():
    """
    Configure logging based on environment settings.
    Log output goes to stderr so CSV written to stdout stays clean.
    Returns the root logger.
    """

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper()))

    root_logger.handlers = []

    console_handler = logging.StreamHandler(sys.stderr)

    if settings.LOG_FORMAT == "json":
        console_handler.setFormatter(JSONFormatter("%(message)s"))
    else:
        console_handler.setFormatter(ColoredFormatter())

    root_logger.addHandler(console_handler)

    if settings.LOG_FILE:
        log_path = Path(settings.LOG_FILE)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_path)
        file_handler.setFormatter(JSONFormatter("%(message)s"))  # Always use JSON for file logs
        root_logger.addHandler(file_handler)

    return root_logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance for a specific module.

    Args:
        name: Name of the logger (usually __name__)

    Returns:
        Configured logger instance
    """
    return logging.getLogger(name)


# Initialize logging when module is imported
setup_logging()

# Create application logger
logger = get_logger("spinet")


__all__ = ["logger", "get_logger", "setup_logging", "JSONFormatter", "ColoredFormatter"]
