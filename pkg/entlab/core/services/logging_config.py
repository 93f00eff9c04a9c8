"""Structured logging configuration for entlab.

Logs always go to standard error; standard output carries the JSON that
the ``relativity`` and ``stats`` subcommands print.
"""

import json
import logging
import sys
from typing import Optional

from entlab.config import settings

_EXTRA_FIELDS = (
    "run_id",
    "event",
    "command",
    "pair_id",
    "step",
    "duration_ms",
    "error_type",
)


class JSONFormatter(logging.Formatter):
    """Custom JSON formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_entry = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        for name in _EXTRA_FIELDS:
            if hasattr(record, name):
                log_entry[name] = getattr(record, name)

        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_entry, ensure_ascii=False)


class TextFormatter(logging.Formatter):
    """Custom text formatter for terminals."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as text."""
        run_id = getattr(record, "run_id", "")
        record.run_id_str = f"[{run_id}] " if run_id else ""
        return super().format(record)


def setup_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """Set up logging configuration."""
    level_name = (level or settings.log_level).upper()
    log_format = (fmt or settings.log_format).lower()

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(getattr(logging, level_name))
    if log_format == "json":
        handler.setFormatter(JSONFormatter())
    else:
        handler.setFormatter(
            TextFormatter(
                fmt="%(asctime)s - %(name)s - %(levelname)s - %(run_id_str)s%(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )

    logging.basicConfig(
        level=getattr(logging, level_name),
        handlers=[handler],
        force=True,
    )


def log_run_started(run_id: str, command: str, **params: object) -> None:
    """Log the start of a CLI run with its parameters."""
    logger = logging.getLogger("entlab.run")
    logger.info(
        "Run started: %s %s",
        command,
        " ".join(f"{key}={value}" for key, value in sorted(params.items())),
        extra={"run_id": run_id, "event": "run_started", "command": command},
    )


def log_run_complete(run_id: str, command: str, duration_ms: int) -> None:
    """Log successful completion of a CLI run."""
    logger = logging.getLogger("entlab.run")
    logger.info(
        "Run completed: %s in %dms",
        command,
        duration_ms,
        extra={
            "run_id": run_id,
            "event": "run_complete",
            "command": command,
            "duration_ms": duration_ms,
        },
    )


def log_run_error(run_id: str, command: str, error: BaseException) -> None:
    """Log a failed CLI run."""
    logger = logging.getLogger("entlab.run")
    logger.error(
        "Run failed: %s: %s",
        command,
        error,
        extra={
            "run_id": run_id,
            "event": "run_error",
            "command": command,
            "error_type": type(error).__name__,
        },
    )


def log_causality_warning(n: int, k: int, bound: float) -> None:
    """Warn that k/n exceeds the light-cone bound."""
    logger = logging.getLogger("entlab.entangler")
    logger.warning(
        "k/n = %d/%d = %.4f exceeds the causality bound k/n <= %.4f",
        k,
        n,
        k / n,
        bound,
        extra={"event": "causality_bound"},
    )


def log_convergence(pair_id: int, step: int, distance: float) -> None:
    """Log the step at which a pair reached an entangled state."""
    logger = logging.getLogger("entlab.entangler")
    logger.debug(
        "Pair %d entangled at step %d (distance %.3g)",
        pair_id,
        step,
        distance,
        extra={"event": "converged", "pair_id": pair_id, "step": step},
    )
