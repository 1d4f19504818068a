"""Worker pool for independent experiment cells."""

from __future__ import annotations

from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

import structlog

logger = structlog.get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_cells(func: Callable[[T], R], cells: Iterable[T], jobs: int = 1) -> list[R]:
    """Apply ``func`` to every cell; results come back in cell order.

    With ``jobs`` <= 1 the cells run in-process. ``func`` must be a
    module-level function when a pool is used.
    """
    cells = list(cells)
    if jobs <= 1 or len(cells) <= 1:
        return [func(cell) for cell in cells]
    workers = min(jobs, len(cells))
    logger.debug("Starting worker pool", workers=workers, cells=len(cells))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, cells))
