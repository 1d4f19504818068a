"""Closed-form orders of e_n for summation operators and weighted Sobolev embeddings.

All logarithms are base 2; L below stands for log2 n. Every function returns
the value together with the exponents of n and L it carries, so that fitted
slopes can be compared against them.
"""

from __future__ import annotations

import math
from dataclasses import replace

import structlog

from entropylab.app.config import Settings, get_settings
from entropylab.app.core.exceptions import DomainException, UnsupportedRegimeException
from entropylab.app.services.asymptotics.models import (
    EnvelopeParams,
    EnvelopeSide,
    EnvelopeValue,
)

logger = structlog.get_logger(__name__)

_EQ_TOL = 1e-12


def _eq(a: float, b: float) -> bool:
    return abs(a - b) <= _EQ_TOL * max(1.0, abs(a), abs(b))


def _gt(a: float, b: float) -> bool:
    return a > b and not _eq(a, b)


def _lt(a: float, b: float) -> bool:
    return a < b and not _eq(a, b)


def _check_n(n: float, settings: Settings) -> None:
    if n < settings.envelope_n_min:
        raise DomainException(
            f"Envelopes are evaluated for n >= {settings.envelope_n_min}", argument="n", value=n
        )


def _unsupported(message: str, regime: str) -> UnsupportedRegimeException:
    return UnsupportedRegimeException(message, regime=regime)


def _value(
    theorem: str, case_id: str, n: float, power: float, log_pow: float, extra: float = 1.0
) -> EnvelopeValue:
    L = math.log2(n)
    return EnvelopeValue(
        theorem=theorem,
        case_id=case_id,
        value=n**power * L**log_pow * extra,
        power=power,
        log_power=log_pow,
    )


def _critical(
    theorem: str, params: EnvelopeParams, n: float, alpha0_geq: float, alpha0_lt: float
) -> EnvelopeValue:
    """The critical line shared by the fractal tree and fractal Sobolev results.

    ``alpha0_geq`` is the effective log exponent when p >= q, ``alpha0_lt``
    the one when p < q.
    """
    gap = params.gap
    L = math.log2(n)
    if params.p_exp >= params.q_exp:
        if not _gt(alpha0_geq, 0.0):
            raise _unsupported(f"Effective exponent {alpha0_geq} must be positive", "critical-p>=q")
        extra = params.rho(L) * params.tau(L) ** (-gap)
        return _value(theorem, "2a", n, 0.0, -alpha0_geq, extra)

    if not _gt(alpha0_lt, 0.0):
        raise _unsupported(f"Effective exponent {alpha0_lt} must be positive", "critical-p<q")
    edge = -gap
    if _eq(alpha0_lt, edge):
        raise _unsupported(f"Effective exponent equals 1/p - 1/q = {edge}", "critical-p<q-edge")
    if alpha0_lt > edge:
        return _value(theorem, "2b-log", n, gap, -alpha0_lt - gap, params.rho(L))
    # rho(n) = log2(n + 2)^(-lambda) is a log-power factor of n
    return _value(theorem, "2b-power", n, -alpha0_lt, -params.lam, params.rho(n) * L**params.lam)


def _theta0_critical(theorem: str, params: EnvelopeParams, n: float) -> EnvelopeValue:
    """alpha - (1 - gamma)(1/q - 1/p)_+ = 0 with theta = 0: purely logarithmic orders."""
    gap, gap_plus, lam, nu = params.gap, params.gap_plus, params.lam, params.nu
    if not _gt(lam, (1.0 - nu) * gap_plus):
        raise _unsupported(
            f"lambda={lam} must exceed (1-nu)(1/q-1/p)_+ = {(1.0 - nu) * gap_plus}", "theta0-log"
        )
    if params.p_exp >= params.q_exp:
        return _value(theorem, "2a", n, 0.0, -lam + (1.0 - nu) * gap)
    edge = -gap
    if _eq(lam, edge):
        raise _unsupported(f"lambda equals 1/p - 1/q = {edge}", "theta0-log-edge")
    if lam > edge:
        return _value(theorem, "2b-log", n, gap, -lam - gap)
    return _value(theorem, "2b-power", n, -lam, 0.0)


def _tree_fractal(params: EnvelopeParams, n: float) -> EnvelopeValue:
    theta, gamma, gap, gap_plus = params.theta, params.gamma, params.gap, params.gap_plus
    kappa, alpha = params.kappa, params.alpha
    w_equal = _eq(params.kappa_w, theta * params.q_exp.reciprocal)
    L = math.log2(n)

    if _gt(kappa, theta * gap_plus):
        alpha0 = alpha - params.q_exp.reciprocal if w_equal else alpha
        extra = params.rho(L) * params.tau(L) ** (-kappa / theta)
        return _value(
            "tree-theta>0", "1", n, -kappa / theta + gap, -alpha0 - kappa * gamma / theta, extra
        )
    if _eq(kappa, theta * gap_plus):
        alpha0_geq = alpha - (1.0 - gamma) * gap - (1.0 if w_equal else 0.0)
        alpha0_lt = alpha - params.q_exp.reciprocal if w_equal else alpha
        return _critical("tree-theta>0", params, n, alpha0_geq, alpha0_lt)
    raise _unsupported(
        f"kappa={kappa} lies below theta(1/q-1/p)_+ = {theta * gap_plus}", "tree-subcritical"
    )


def _tree_zero_dimension(params: EnvelopeParams, n: float) -> EnvelopeValue:
    if not _eq(params.kappa, 0.0) or not params.kappa_w > 0:
        raise _unsupported(
            "theta = 0 needs kappa = 0 and kappa_w > 0", "tree-theta0-weights"
        )
    gamma, gap, gap_plus = params.gamma, params.gap, params.gap_plus
    alpha, lam, nu = params.alpha, params.lam, params.nu
    excess = alpha - (1.0 - gamma) * gap_plus
    if _gt(excess, 0.0):
        if not gamma < 1.0:
            raise _unsupported(f"gamma={gamma} must be below 1", "tree-theta0-gamma")
        return _value(
            "tree-theta=0",
            "1",
            n,
            -alpha / (1.0 - gamma) + gap,
            -lam - alpha * nu / (1.0 - gamma),
        )
    if _eq(excess, 0.0):
        return _theta0_critical("tree-theta=0", params, n)
    raise _unsupported(f"alpha={alpha} lies below (1-gamma)(1/q-1/p)_+", "tree-theta0-subcritical")


def tree_envelope(
    params: EnvelopeParams, n: float, settings: Settings | None = None
) -> EnvelopeValue:
    """Order of e_n(S: l_p(T) -> l_q(T)) for weights of the given log-power type.

    For theta > 0 the weight w must satisfy kappa_w > theta/q, or equality
    with alpha_w > (1 - gamma)/q.

    Raises:
        DomainException: for n below ``envelope_n_min``
        UnsupportedRegimeException: on excluded boundaries
    """
    settings = settings or get_settings()
    _check_n(n, settings)
    if params.side is not EnvelopeSide.TREE:
        raise _unsupported("Sobolev parameters passed to the tree envelope", "side")
    theta = params.theta
    if theta < 0:
        raise DomainException("theta must be nonnegative", argument="theta", value=theta)

    if _eq(theta, 0.0):
        result = _tree_zero_dimension(params, n)
    else:
        edge = theta * params.q_exp.reciprocal
        w_ok = _gt(params.kappa_w, edge) or (
            _eq(params.kappa_w, edge)
            and _gt(params.alpha_w, (1.0 - params.gamma) * params.q_exp.reciprocal)
        )
        if not w_ok:
            raise _unsupported(
                f"kappa_w={params.kappa_w}, alpha_w={params.alpha_w} violate the condition on w",
                "weight-condition",
            )
        result = _tree_fractal(params, n)
    logger.debug("Tree envelope evaluated", n=n, case=result.case_id, value=result.value)
    return result


def _sobolev_fractal(params: EnvelopeParams, n: float) -> EnvelopeValue:
    theta, gamma, gap, gap_plus = params.theta, params.gamma, params.gap, params.gap_plus
    d, delta, beta, alpha = params.d, params.delta, params.beta, params.alpha
    v_edge = (d - theta) * params.q_exp.reciprocal
    v_equal = _eq(params.beta_v, v_edge)
    if not (
        _lt(params.beta_v, v_edge)
        or (v_equal and _gt(params.alpha_v, (1.0 - gamma) * params.q_exp.reciprocal))
    ):
        raise _unsupported(
            f"beta_v={params.beta_v}, alpha_v={params.alpha_v} violate the condition on v",
            "weight-condition",
        )
    L = math.log2(n)
    shift = beta - delta
    if _lt(shift, -theta * gap_plus):
        alpha0 = alpha - params.q_exp.reciprocal if v_equal else alpha
        smooth, fractal = delta / d, (delta - beta) / theta
        if _eq(smooth, fractal):
            raise _unsupported("delta/d equals (delta - beta)/theta", "sobolev-balanced")
        if smooth < fractal:
            return _value("sobolev-theta>0", "1-smooth", n, -smooth + gap, 0.0)
        extra = params.rho(L) * params.tau(L) ** (shift / theta)
        return _value(
            "sobolev-theta>0", "1-weight", n, -fractal + gap, -alpha0 + shift * gamma / theta, extra
        )
    if _eq(shift, -theta * gap_plus):
        alpha0_geq = alpha - (1.0 - gamma) * gap - (1.0 if v_equal else 0.0)
        alpha0_lt = alpha - params.q_exp.reciprocal if v_equal else alpha
        return _critical("sobolev-theta>0", params, n, alpha0_geq, alpha0_lt)
    raise _unsupported(
        f"beta - delta = {shift} lies above -theta(1/q-1/p)_+", "sobolev-subcritical"
    )


def _sobolev_zero_dimension(params: EnvelopeParams, n: float) -> EnvelopeValue:
    d, r, delta, beta = params.d, params.r, params.delta, params.beta
    if not _lt(params.beta_v, d * params.q_exp.reciprocal):
        raise _unsupported(f"beta_v={params.beta_v} must lie below d/q", "weight-condition")
    shift = beta - delta
    if _lt(shift, 0.0):
        return _value("sobolev-theta=0-strict", "1", n, -r / d, 0.0)
    if not _eq(shift, 0.0):
        raise _unsupported(f"beta - delta = {shift} must be nonpositive", "sobolev-subcritical")

    gamma, gap, gap_plus = params.gamma, params.gap, params.gap_plus
    alpha, lam, nu = params.alpha, params.lam, params.nu
    excess = alpha - (1.0 - gamma) * gap_plus
    if _gt(excess, 0.0):
        if not gamma < 1.0:
            raise _unsupported(f"gamma={gamma} must be below 1", "sobolev-theta0-gamma")
        smooth, weight = delta / d, alpha / (1.0 - gamma)
        if _eq(smooth, weight):
            raise _unsupported("delta/d equals alpha/(1 - gamma)", "sobolev-balanced")
        if smooth < weight:
            return _value("sobolev-theta=0-critical", "1-smooth", n, -smooth + gap, 0.0)
        return _value(
            "sobolev-theta=0-critical", "1-weight", n, -weight + gap, -lam - alpha * nu / (1.0 - gamma)
        )
    if _eq(excess, 0.0):
        return _theta0_critical("sobolev-theta=0-critical", params, n)
    raise _unsupported(f"alpha={alpha} lies below (1-gamma)(1/q-1/p)_+", "sobolev-subcritical")


def sobolev_envelope(
    params: EnvelopeParams, n: float, settings: Settings | None = None
) -> EnvelopeValue:
    """Order of e_n of the weighted embedding W^r_p(Omega) -> L_q(Omega).

    Omega is a domain whose boundary is an h-set of dimension theta < d. With
    ``singleton`` set, the boundary is a single point: theta = 0, gamma = 0
    and tau = 1.

    Raises:
        DomainException: for n below ``envelope_n_min``
        UnsupportedRegimeException: on excluded boundaries or delta <= 0
    """
    settings = settings or get_settings()
    _check_n(n, settings)
    if params.side is not EnvelopeSide.SOBOLEV:
        raise _unsupported("Tree parameters passed to the Sobolev envelope", "side")
    if params.singleton:
        params = replace(params, theta=0.0, gamma=0.0, nu=0.0, singleton=False)
    if not _gt(params.delta, 0.0):
        raise _unsupported(f"delta = r + d/q - d/p = {params.delta} must be positive", "delta")
    if params.theta < 0 or not _lt(params.theta, params.d):
        raise _unsupported(f"theta={params.theta} must lie in [0, d)", "theta")

    if _eq(params.theta, 0.0):
        result = _sobolev_zero_dimension(params, n)
    else:
        result = _sobolev_fractal(params, n)
    logger.debug("Sobolev envelope evaluated", n=n, case=result.case_id, value=result.value)
    return result


def envelope(params: EnvelopeParams, n: float, settings: Settings | None = None) -> EnvelopeValue:
    """Dispatch on ``params.side``."""
    if params.side is EnvelopeSide.TREE:
        return tree_envelope(params, n, settings)
    return sobolev_envelope(params, n, settings)


__all__ = ["envelope", "sobolev_envelope", "tree_envelope"]
