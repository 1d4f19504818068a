"""Least-squares fits of rate exponents."""

from __future__ import annotations

import numpy as np
import structlog

from entropylab.app.core.exceptions import DegenerateGridException
from entropylab.app.services.asymptotics.models import RateSeries, SlopeFit

logger = structlog.get_logger(__name__)

MIN_POINTS = 6
MIN_SPAN = 8.0


def slope_fit(series: RateSeries) -> SlopeFit:
    """Fit log2 value = a log2 n + b log2 log2 n + c.

    Needs at least six points with n_max / n_min >= 8 and every n >= 2.
    """
    if len(series) < MIN_POINTS:
        raise DegenerateGridException(f"Need at least {MIN_POINTS} points, got {len(series)}")
    n = series.n
    if n[0] < 2:
        raise DegenerateGridException("Grid must start at n >= 2")
    if n[-1] / n[0] < MIN_SPAN:
        raise DegenerateGridException(f"Grid span {n[-1] / n[0]} is below {MIN_SPAN}")

    log_n = np.log2(n)
    design = np.column_stack([log_n, np.log2(log_n), np.ones_like(n)])
    target = np.log2(series.values)
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.max(np.abs(design @ coef - target)))
    fit = SlopeFit(
        power=float(coef[0]),
        log_power=float(coef[1]),
        intercept=float(coef[2]),
        residual=residual,
    )
    logger.debug("Slopes fitted", points=len(series), **fit.to_dict())
    return fit
