"""Order of subtree operator norms, C(j), and experiments comparing it with computed norms."""

from __future__ import annotations

import math
from collections.abc import Sequence

import structlog

from entropylab.app.config import Settings, get_settings
from entropylab.app.core.exceptions import DomainException, UnsupportedRegimeException
from entropylab.app.services.spaces import Exponent
from entropylab.app.services.summation.models import (
    CjBandResult,
    CjValue,
    SummationOperator,
    WeightProfile,
)
from entropylab.app.services.summation.operator import operator_norm
from entropylab.app.services.trees.hset import generate_hset_tree
from entropylab.app.services.trees.models import HSetProfile, TauKind

logger = structlog.get_logger(__name__)

_EQ_TOL = 1e-12


def _eq(a: float, b: float) -> bool:
    return abs(a - b) <= _EQ_TOL * max(1.0, abs(a), abs(b))


def _gt(a: float, b: float) -> bool:
    return a > b and not _eq(a, b)


def cj_envelope(
    profile: WeightProfile,
    hprofile: HSetProfile,
    p: Exponent | float | str,
    q: Exponent | float | str,
    j: int,
) -> CjValue:
    """C(j) for j >= 2: the order of the norm of S restricted to a level-j subtree.

    Raises:
        DomainException: for j < 2
        UnsupportedRegimeException: when the weight condition on w fails or the
            parameters sit on a boundary no case covers
    """
    p, q = Exponent.of(p), Exponent.of(q)
    if j < 2:
        raise DomainException("C(j) is defined for j >= 2", argument="j", value=j)

    theta, gamma = hprofile.theta, hprofile.gamma
    if not profile.satisfies_muck(theta, gamma, q):
        raise UnsupportedRegimeException(
            f"kappa_w={profile.kappa_w}, alpha_w={profile.alpha_w} violate the condition on w "
            f"for theta={theta}, q={q}",
            regime="weight-condition",
            suggestion="Raise kappa_w above theta/q, or alpha_w above (1-gamma)/q at equality.",
        )

    gap = q.reciprocal - p.reciprocal
    gap_plus = max(gap, 0.0)
    kappa, alpha = profile.kappa, profile.alpha
    M = float(profile.m_star * j)
    rho = profile.rho(M)
    edge_w = theta * q.reciprocal
    w_strict = _gt(profile.kappa_w, edge_w)
    w_equal = _eq(profile.kappa_w, edge_w)

    if _eq(theta, 0.0) and _eq(kappa, 0.0) and profile.kappa_w > 0:
        excess = alpha - (1.0 - gamma) * gap_plus
        if _eq(excess, 0.0):
            nu = hprofile.nu if hprofile.tau_kind is TauKind.LOG_POWER else 0.0
            lam = profile.lam
            if not _gt(lam, (1.0 - nu) * gap_plus):
                raise UnsupportedRegimeException(
                    f"lambda={lam} must exceed (1-nu)(1/q-1/p)_+ = {(1.0 - nu) * gap_plus}",
                    regime="theta0-log",
                )
            if p <= q:
                return CjValue("theta0-p<=q", math.log2(M) ** (-lam))
            return CjValue("theta0-p>q", M ** (gamma * gap) * math.log2(M) ** (-lam + gap))

    if w_strict and _gt(kappa, theta * gap_plus):
        return CjValue("1", 2.0 ** (-kappa * M) * M ** (-alpha) * rho)
    if w_strict and _eq(kappa, theta * gap_plus) and _gt(alpha, (1.0 - gamma) * gap_plus):
        return CjValue("2", 2.0 ** (-theta * gap_plus * M) * M ** (-alpha + gap_plus) * rho)
    if theta > 0 and w_equal:
        if _gt(kappa, theta * gap_plus) or (
            _eq(kappa, theta * gap_plus) and _gt(alpha, q.reciprocal) and p < q
        ):
            return CjValue("3", 2.0 ** (-kappa * M) * M ** (-alpha + q.reciprocal) * rho)
        if _eq(kappa, theta * gap_plus) and p >= q and _gt(alpha, 1.0 + (1.0 - gamma) * gap_plus):
            return CjValue("4", 2.0 ** (-theta * gap * M) * M ** (-alpha + 1.0 + gap) * rho)

    raise UnsupportedRegimeException(
        f"No C(j) case covers kappa={kappa}, alpha={alpha}, theta={theta}, p={p}, q={q}",
        regime="cj-boundary",
    )


def cj_band_experiment(
    profile: WeightProfile,
    hprofile: HSetProfile,
    p: Exponent | float | str,
    q: Exponent | float | str,
    j_range: Sequence[int],
    extra_depth: int = 6,
    band: float | None = None,
    settings: Settings | None = None,
) -> CjBandResult:
    """Compare norms of level-j subtree operators with C(j) across j.

    The tree is generated to depth max(j) + extra_depth; for each j the first
    vertex of level j roots the subtree.
    """
    settings = settings or get_settings()
    band = settings.cj_band if band is None else band
    js = sorted(set(int(j) for j in j_range))
    if not js:
        raise DomainException("j_range must not be empty", argument="j_range", value=list(j_range))

    generated = generate_hset_tree(hprofile, js[-1] + extra_depth, settings)
    S = SummationOperator.from_profile(generated.tree, profile, p, q)
    case_ids = set()
    result = CjBandResult(case_id="", band=band)
    for j in js:
        envelope = cj_envelope(profile, hprofile, p, q, j)
        case_ids.add(envelope.case_id)
        v = int(generated.tree.vertices_at_level(j)[0])
        norm = operator_norm(S.restrict(v), settings)
        result.js.append(j)
        result.norms.append(norm.value)
        result.envelopes.append(envelope.value)
        result.ratios.append(norm.value / envelope.value)
        result.exact = result.exact and norm.exact

    result.case_id = ",".join(sorted(case_ids))
    logger.info(
        "C(j) band experiment finished",
        case=result.case_id,
        spread=result.spread,
        band=band,
        passed=result.passed,
    )
    return result
