"""Closed-form order envelopes: identities between l_p^nu spaces and diagonal operators."""

from __future__ import annotations

import math

import structlog

from entropylab.app.core.exceptions import UnsupportedRegimeException, ValidationException
from entropylab.app.services.entropy.models import SequenceProfile, TailLowerBound
from entropylab.app.services.spaces import Exponent

logger = structlog.get_logger(__name__)


def schutt_envelope(p: Exponent | float | str, q: Exponent | float | str, nu: int, k: int) -> float:
    """Order of e_k(I: l_p^nu -> l_q^nu), without the hidden constants.

    For p <= q there are three regimes; k = log2(nu) counts as the first and
    k = nu as the middle one. For q < p a single exponential regime applies.
    """
    p, q = Exponent.of(p), Exponent.of(q)
    if nu < 1 or k < 1:
        raise ValidationException("Schütt envelope needs nu >= 1 and k >= 1", field="k")

    gap = p.reciprocal - q.reciprocal
    tail = 2.0 ** (-k / nu) * float(nu) ** (-gap)
    if q < p:
        return tail
    if k <= math.log2(nu):
        return 1.0
    if k <= nu:
        return (math.log2(1.0 + nu / k) / k) ** gap
    return tail


def kuhn_exponent(p: Exponent | float | str, q: Exponent | float | str) -> float:
    """The summation exponent pq/(p-q), equal to q when p = ∞."""
    p, q = Exponent.of(p), Exponent.of(q)
    if not q < p:
        raise UnsupportedRegimeException(
            f"Diagonal tails need q < p, got p={p}, q={q}",
            regime="q>=p",
            suggestion="Use schutt_envelope or the tree envelopes when p <= q.",
        )
    return 1.0 / (q.reciprocal - p.reciprocal)


def kuhn_omega(
    sigma: SequenceProfile,
    p: Exponent | float | str,
    q: Exponent | float | str,
    n: int,
) -> float:
    """omega_n = (sum_{k>=n} sigma_k^s)^(1/s) with s = pq/(p-q).

    Raises:
        UnsupportedRegimeException: if q >= p
        DivergenceException: if the series diverges
    """
    if n < 1:
        raise ValidationException("Tail index n starts at 1", field="n")
    s = kuhn_exponent(p, q)
    total = sigma.tail_power_sum(n, s)
    return 0.0 if total <= 0.0 else total ** (1.0 / s)


def check_doubling(
    sigma: SequenceProfile,
    p: Exponent | float | str,
    q: Exponent | float | str,
    N: int,
) -> float:
    """Smallest C with omega_n <= C * omega_{2n} for every n <= N.

    Indices where omega_{2n} vanishes are skipped; if none is left the
    constant is reported as infinite.
    """
    if N < 1:
        raise ValidationException("Doubling range N starts at 1", field="N")
    worst = -math.inf
    for n in range(1, N + 1):
        denominator = kuhn_omega(sigma, p, q, 2 * n)
        if denominator <= 0.0:
            continue
        worst = max(worst, kuhn_omega(sigma, p, q, n) / denominator)

    if worst == -math.inf:
        logger.warning("No finite doubling ratio", N=N)
        return math.inf
    return worst


def tail_lower_bound(
    block_norms: SequenceProfile,
    p: Exponent | float | str,
    q: Exponent | float | str,
    n: int,
) -> TailLowerBound:
    """Order-only lower rate omega_n built from a profile of block norms M_j.

    The value is a lower bound on e_n only up to a constant that depends on the
    doubling constant of omega, which is reported alongside.
    """
    value = kuhn_omega(block_norms, p, q, n)
    doubling = check_doubling(block_norms, p, q, n)
    return TailLowerBound(n=n, value=value, doubling_constant=doubling, certified=False)
