"""Logging configuration using structlog.

Log records go to stderr; stdout is reserved for the CLI's JSON reports.
"""

import logging
import sys
import time

import structlog
from structlog.types import Processor

from entropylab.app.config import get_settings


def setup_logging(level: str | None = None) -> None:
    """Configure structlog and the stdlib root logger.

    Args:
        level: Overrides ``settings.log_level``; ``debug`` forces DEBUG
    """
    settings = get_settings()
    log_level = logging.DEBUG if settings.debug else getattr(logging, (level or settings.log_level).upper())

    processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
    ]
    # interactive terminals get readable lines, pipes and CI get JSON
    if settings.debug or sys.stderr.isatty():
        processors.append(structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))
    else:
        processors += [structlog.processors.format_exc_info, structlog.processors.JSONRenderer()]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=log_level, force=True)


class ExperimentLogger:
    """Start, completion and failure events of one experiment run."""

    def __init__(self, kind: str, run_id: str) -> None:
        self.logger = structlog.get_logger(f"experiment.{kind}").bind(kind=kind, run_id=run_id)
        self._started = time.perf_counter()

    def started(self, **kwargs) -> None:
        self._started = time.perf_counter()
        self.logger.info("experiment_started", **kwargs)

    def completed(self, passed: bool, **kwargs) -> float:
        """Log completion and return the elapsed seconds."""
        duration = time.perf_counter() - self._started
        log = self.logger.info if passed else self.logger.warning
        log("experiment_completed", passed=passed, duration_s=round(duration, 3), **kwargs)
        return duration

    def failed(self, error: str, **kwargs) -> None:
        self.logger.error("experiment_failed", error=error, **kwargs)
