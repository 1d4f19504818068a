"""Inversion of regularly varying growth functions and slowly-varying checks."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence

import numpy as np
import structlog
from scipy.optimize import brentq

from entropylab.app.config import Settings, get_settings
from entropylab.app.core.exceptions import (
    ConvergenceException,
    DomainException,
    ValidationException,
)
from entropylab.app.services.asymptotics.models import (
    GrowthSolution,
    LogPowerProfile,
    SlowlyVaryingReport,
    log_power,
)

logger = structlog.get_logger(__name__)

_LN2 = math.log(2.0)
_NEWTON_STEPS = 3


def _log_growth(s: float, gamma: float, psi: LogPowerProfile) -> float:
    """ln F(e^s) for F(y) = y^gamma psi(y)."""
    if psi.trivial:
        return gamma * s
    t = s / _LN2
    return (
        gamma * s
        + psi.log_power * math.log(t)
        + psi.loglog_power * math.log(math.log2(t + 2.0))
    )


def _log_growth_slope(s: float, gamma: float, psi: LogPowerProfile) -> float:
    """d/ds ln F(e^s)."""
    if psi.trivial:
        return gamma
    t = s / _LN2
    return (
        gamma
        + psi.log_power / s
        + psi.loglog_power / ((t + 2.0) * math.log(t + 2.0) * _LN2)
    )


def _increasing_from(gamma: float, psi: LogPowerProfile) -> float:
    """Smallest grid value of s = ln y past which ln F is increasing on the grid."""
    if psi.trivial:
        return -math.inf
    grid = np.geomspace(1e-6, 1e6, 2401)
    slopes = np.array([_log_growth_slope(float(s), gamma, psi) for s in grid])
    falling = np.flatnonzero(slopes <= 0)
    if falling.size == 0:
        return float(grid[0])
    if falling[-1] == grid.size - 1:
        raise DomainException(
            "Growth function is not eventually increasing", argument="gamma", value=gamma
        )
    return float(grid[falling[-1] + 1])


def invert_growth(
    gamma: float,
    psi: LogPowerProfile,
    x: float,
    settings: Settings | None = None,
) -> GrowthSolution:
    """Solve y^gamma psi(y) = x for y on the increasing branch.

    The root is bracketed in s = ln y, found with Brent's method and polished
    by Newton steps. The result is compared against the closed form
    x^(1/gamma) (log2 x)^(-a/gamma) log2(log2 x + 2)^(-b/gamma) for psi of
    log power a and log-log power b.

    Raises:
        ValidationException: for gamma <= 0
        DomainException: for x below the value at the start of the increasing branch
        ConvergenceException: when the residual stays above ``growth_rtol``
    """
    settings = settings or get_settings()
    if gamma <= 0:
        raise ValidationException("gamma must be positive", field="gamma")
    if x <= 0 or not math.isfinite(x):
        raise DomainException("x must be positive and finite", argument="x", value=x)

    s0 = _increasing_from(gamma, psi)
    target = math.log(x)
    if math.isinf(s0):
        x0 = 0.0
        lo = target / gamma - 1.0
    else:
        x0 = math.exp(_log_growth(s0, gamma, psi))
        if x < x0:
            raise DomainException(
                f"x={x} lies below the increasing branch, which starts at {x0}",
                argument="x",
                value=x,
            )
        lo = s0

    def residual(s: float) -> float:
        return _log_growth(s, gamma, psi) - target

    hi = max(lo + 1.0, target / gamma + 1.0)
    while residual(hi) < 0:
        hi = 2.0 * hi + 1.0
    if residual(lo) >= 0:
        s = lo
    else:
        s = brentq(residual, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    for _ in range(_NEWTON_STEPS):
        slope = _log_growth_slope(s, gamma, psi)
        if slope <= 0:
            break
        s_next = s - residual(s) / slope
        if not lo <= s_next <= hi:
            break
        s = s_next

    y = math.exp(s)
    relative = abs(math.exp(_log_growth(s, gamma, psi)) - x) / x
    if relative > settings.growth_rtol:
        logger.warning("Growth inversion residual above tolerance", x=x, residual=relative)
        raise ConvergenceException(
            f"Solving y^{gamma} psi(y) = {x} left a relative residual of {relative:.3e}",
            residual=relative,
            tolerance=settings.growth_rtol,
        )

    if x > 1.0 and math.log2(x) > 0:
        lx = math.log2(x)
        asymptotic = (
            x ** (1.0 / gamma)
            * lx ** (-psi.log_power / gamma)
            * log_power(lx, -psi.loglog_power / gamma)
        )
        ratio = y / asymptotic
    else:
        asymptotic = ratio = math.nan

    logger.debug("Growth inverted", x=x, y=y, residual=relative, ratio=ratio)
    return GrowthSolution(
        x=x, y=y, residual=relative, x0=x0, asymptotic=asymptotic, asymptotic_ratio=ratio
    )


def slowly_varying_check(
    func: Callable[[float], float],
    epsilon: float,
    y_grid: Sequence[float] | None = None,
    t_grid: Sequence[float] | None = None,
    settings: Settings | None = None,
) -> SlowlyVaryingReport:
    """Smallest C with t^-eps / C <= f(ty) / f(y) <= C t^eps over the grids.

    Both grids default to 2^0, ..., 2^20 (y starts at 2). The check passes
    when C stays below ``slowly_varying_cap``.
    """
    settings = settings or get_settings()
    if epsilon <= 0:
        raise ValidationException("epsilon must be positive", field="epsilon")
    ys = np.asarray(y_grid if y_grid is not None else 2.0 ** np.arange(1, 21), dtype=float)
    ts = np.asarray(t_grid if t_grid is not None else 2.0 ** np.arange(0, 21), dtype=float)
    if np.any(ts < 1):
        raise ValidationException("t values must be at least 1", field="t_grid")

    base = np.array([func(float(y)) for y in ys])
    scaled = np.array([[func(float(t * y)) for y in ys] for t in ts])
    if np.any(base <= 0) or np.any(scaled <= 0):
        raise DomainException("Function must be positive on the grid", argument="func", value=None)
    ratios = scaled / base[None, :]
    slack = ts[:, None] ** epsilon
    constant = float(max(1.0, np.max(ratios / slack), np.max(1.0 / (slack * ratios))))
    cap = settings.slowly_varying_cap
    return SlowlyVaryingReport(
        constant=constant, epsilon=epsilon, cap=cap, passed=constant <= cap
    )
