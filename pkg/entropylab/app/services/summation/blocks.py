"""Entropy lower bounds of summation operators from disjoint subtree blocks."""

from __future__ import annotations

import numpy as np
import structlog

from entropylab.app.config import Settings, get_settings
from entropylab.app.core.exceptions import (
    NoIncomparableSetException,
    ValidationException,
)
from entropylab.app.services.entropy.calculus import block_lower_bound
from entropylab.app.services.entropy.envelopes import schutt_envelope
from entropylab.app.services.entropy.models import OperatorMatrix
from entropylab.app.services.entropy.oracle import entropy_oracle_coarsened
from entropylab.app.services.summation.models import BlockLowerResult, SummationOperator
from entropylab.app.services.summation.operator import operator_norm

logger = structlog.get_logger(__name__)


def _subtree_norm(S: SummationOperator, v: int, settings: Settings) -> float:
    """Norm of S on the subtree at v, or a certified lower bound outside the exact regimes."""
    return operator_norm(S.restrict(v), settings).lower


def entropy_lower_via_blocks(
    S: SummationOperator,
    n: int,
    m: int,
    mesh: float = 0.1,
    settings: Settings | None = None,
) -> BlockLowerResult:
    """Lower bound on e_n(S) from m pairwise incomparable subtrees.

    Subtrees rooted on one level are disjoint, so S dominates the block
    diagonal operator built from them. The level and vertices are chosen to
    maximise the smallest block norm M. For m = 1 the one-dimensional value
    2^(1-n) is exact; for m <= 4 the identity I_m is bracketed by the oracle
    and the result is certified; otherwise Schütt's envelope gives an
    order-only value.
    """
    settings = settings or get_settings()
    if n < 1 or m < 1:
        raise ValidationException("Need n >= 1 and m >= 1", field="n")
    if m > 1 and n > m:
        raise ValidationException(f"Index n={n} must not exceed the block count m={m}", field="n")

    counts = S.tree.level_counts()
    if counts.max() < m:
        raise NoIncomparableSetException(m, int(counts.max()))

    best_level, best_vertices, best_M = -1, (), -np.inf
    for j in np.flatnonzero(counts >= m):
        verts = S.tree.vertices_at_level(int(j))
        norms = np.array([_subtree_norm(S, int(v), settings) for v in verts])
        # stable sort keeps the lowest ids among equal norms
        top = np.argsort(-norms, kind="stable")[:m]
        M = float(norms[top[-1]])
        if M > best_M:
            best_level, best_vertices, best_M = int(j), tuple(int(verts[i]) for i in top), M

    if m == 1:
        identity_value, certified = 2.0 ** (1 - n), True
        value = best_M * identity_value
    elif m <= settings.oracle_max_dim:
        identity = OperatorMatrix.identity(m, S.p, S.q)
        interval = entropy_oracle_coarsened(identity, n, mesh, settings)
        identity_value, certified = interval.lower, True
        value = block_lower_bound([best_M] * m, interval, n=n)
    else:
        identity_value, certified = schutt_envelope(S.p, S.q, m, n), False
        value = best_M * identity_value

    logger.debug(
        "Block lower bound computed",
        n=n,
        m=m,
        level=best_level,
        min_block_norm=best_M,
        value=value,
        certified=certified,
    )
    return BlockLowerResult(
        value=value,
        certified=certified,
        n=n,
        m=m,
        level=best_level,
        vertices=best_vertices,
        min_block_norm=best_M,
        identity_value=identity_value,
    )
