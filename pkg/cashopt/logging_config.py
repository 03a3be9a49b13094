"""Logging configuration with emoji indicators."""

import logging
from pathlib import Path

WORKFLOW_LOGGER = "cashopt.workflows"


class EmojiFormatter(logging.Formatter):
    """Console formatter for cashopt runs.

    Prefixes each record with a level marker, so warnings such as resampling-mask
    disagreements between splits or workflows failing on the full training set
    stand out among the per-split progress lines. Per-workflow lines go to
    workflows.log with a bare message format instead.
    """

    EMOJI_MAP = {
        logging.DEBUG: "🔍",
        logging.INFO: "ℹ️ ",
        logging.WARNING: "⚠️ ",
        logging.ERROR: "❌",
        logging.CRITICAL: "🔥",
    }

    def format(self, record):
        """Set ``record.emoji`` for the ``%(emoji)s`` field, then format."""
        emoji = self.EMOJI_MAP.get(record.levelno, "")
        record.emoji = emoji
        return super().format(record)


def setup_logging(log_level: str = "INFO") -> logging.Logger:
    """Configure the package logger with the emoji formatter.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger("cashopt")
    logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))

    # Repeated CLI invocations in one process (tests) must not stack handlers.
    if not any(getattr(h, "_cashopt_console", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(
            EmojiFormatter(
                fmt="%(asctime)s %(emoji)s [%(levelname)s] %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
        handler._cashopt_console = True
        logger.addHandler(handler)
    logger.propagate = False  # Don't propagate to root logger

    return logger


def attach_file_handler(
    logger: logging.Logger, path: str | Path, fmt: str | None = None
) -> logging.FileHandler:
    """Mirror a logger's records into a plain-text file.

    Args:
        logger: Logger whose records should also land in the file
        path: Destination file (parent directory must exist)
        fmt: Optional format string; defaults to timestamp + level + message

    Returns:
        The attached handler, so callers can detach and close it.
    """
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setFormatter(
        logging.Formatter(
            fmt=fmt or "%(asctime)s [%(levelname)s] %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
    )
    logger.addHandler(handler)
    return handler


def detach_handler(logger: logging.Logger, handler: logging.Handler) -> None:
    """Remove and close a handler added by attach_file_handler."""
    logger.removeHandler(handler)
    handler.close()
