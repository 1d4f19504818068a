"""Evaluation and norms of summation operators on trees."""

from __future__ import annotations

import hashlib

import numpy as np
import structlog

from entropylab.app.config import Settings, get_settings
from entropylab.app.core.exceptions import ScaleException, UnsupportedRegimeException
from entropylab.app.services.entropy.models import OperatorMatrix
from entropylab.app.services.spaces import Exponent, row_norms
from entropylab.app.services.summation.models import (
    NormEstimate,
    NormMethod,
    NormResult,
    SummationOperator,
)

logger = structlog.get_logger(__name__)


def apply(S: SummationOperator, f: np.ndarray) -> np.ndarray:
    """g(xi) = w(xi) * sum_{xi' <= xi} u(xi') f(xi'), one prefix pass per level.

    ``f`` may be a vector or a (V, B) batch of column vectors.
    """
    f = np.asarray(f, dtype=float)
    weighted = S.u.reshape((-1,) + (1,) * (f.ndim - 1)) * f
    prefix = np.empty_like(weighted)
    tree = S.tree
    prefix[tree.root] = weighted[tree.root]
    for verts in tree.level_vertices[1:]:
        prefix[verts] = prefix[tree.parent[verts]] + weighted[verts]
    return S.w.reshape((-1,) + (1,) * (f.ndim - 1)) * prefix


def adjoint(S: SummationOperator, g: np.ndarray) -> np.ndarray:
    """(S^T g)(xi') = u(xi') * sum_{xi >= xi'} w(xi) g(xi), by subtree sums."""
    g = np.asarray(g, dtype=float)
    shape = (-1,) + (1,) * (g.ndim - 1)
    acc = S.w.reshape(shape) * g
    tree = S.tree
    for verts in reversed(tree.level_vertices[1:]):
        np.add.at(acc, tree.parent[verts], acc[verts])
    return S.u.reshape(shape) * acc


def to_matrix(S: SummationOperator, settings: Settings | None = None) -> OperatorMatrix:
    """Dense matrix M[xi, xi'] = w(xi) u(xi') for xi' <= xi."""
    settings = settings or get_settings()
    if S.size > settings.matrix_max_vertices:
        raise ScaleException(
            f"Dense matrix of a {S.size}-vertex tree requested",
            limit=f"V <= {settings.matrix_max_vertices}",
            suggestion="Use apply() or the matrix-free norm routines instead.",
        )
    tree = S.tree
    # below[a, b]: b lies in the subtree of a
    below = (tree.tin[:, None] <= tree.tin[None, :]) & (tree.tin[None, :] < tree.tout[:, None])
    matrix = below.T * np.outer(S.w, S.u)
    return OperatorMatrix(matrix, S.p, S.q)


def column_norms(S: SummationOperator) -> np.ndarray:
    """||S e_xi'||_q for every vertex: u(xi') times the l_q norm of w on its subtree."""
    tree = S.tree
    q = S.q
    if q.is_infinite:
        acc = S.w.copy()
        for verts in reversed(tree.level_vertices[1:]):
            np.maximum.at(acc, tree.parent[verts], acc[verts])
        return S.u * acc
    scale = S.w.max()
    acc = (S.w / scale) ** q.finite
    for verts in reversed(tree.level_vertices[1:]):
        np.add.at(acc, tree.parent[verts], acc[verts])
    return S.u * scale * acc ** (1.0 / q.finite)


def norm_exact(S: SummationOperator, settings: Settings | None = None) -> NormResult:
    """||S||_{p->q} for p = 1, p = ∞ or p = q = 2.

    Raises:
        UnsupportedRegimeException: for any other (p, q)
    """
    settings = settings or get_settings()
    p, q = S.p, S.q
    if p.finite == 1.0:
        value = float(column_norms(S).max())
        return NormResult(value, value, value, NormMethod.COLUMN)
    if p.is_infinite:
        value = float(row_norms(apply(S, np.ones(S.size))[None, :], q)[0])
        return NormResult(value, value, value, NormMethod.ALL_ONES)
    if p.finite == 2.0 and q.finite == 2.0:
        return _power_iteration(S, settings)
    raise UnsupportedRegimeException(
        f"No exact norm for p={p}, q={q}",
        regime=f"p={p},q={q}",
        suggestion="Use norm_estimate for a certified lower bound.",
    )


def _power_iteration(S: SummationOperator, settings: Settings) -> NormResult:
    """Spectral norm from the Perron root of S^T S.

    S^T S is entrywise nonnegative and its root row is positive, so for any
    positive x the ratios (S^T S x)_i / x_i bracket the Perron root.
    """
    x = np.ones(S.size)
    lo, hi = 0.0, np.inf
    iterations = 0
    for iterations in range(1, settings.power_max_iter + 1):
        y = adjoint(S, apply(S, x))
        ratios = y / x
        lo, hi = float(ratios.min()), float(ratios.max())
        x = y / y.max()
        if hi - lo <= settings.power_tol * hi:
            break
    else:
        logger.warning(
            "Power iteration hit the iteration cap", vertices=S.size, lower=lo, upper=hi
        )
    rayleigh = float(x @ adjoint(S, apply(S, x)) / (x @ x))
    value = min(max(rayleigh, lo), hi)
    return NormResult(
        value=value**0.5,
        lower=lo**0.5,
        upper=hi**0.5,
        method=NormMethod.POWER,
        iterations=iterations,
    )


def _dual_direction(v: np.ndarray, r: Exponent) -> np.ndarray:
    """Columnwise direction attaining the l_r norm of a nonnegative batch v."""
    if r.is_infinite:
        out = np.zeros_like(v)
        out[np.argmax(v, axis=0), np.arange(v.shape[1])] = 1.0
        return out
    if r.finite == 1.0:
        return np.where(v > 0, 1.0, 0.0)
    peak = np.where(v.max(axis=0) > 0, v.max(axis=0), 1.0)
    return np.where(v > 0, (v / peak) ** (r.finite - 1.0), 0.0)


def _normalise(x: np.ndarray, p: Exponent) -> np.ndarray:
    norms = row_norms(x.T, p)
    return x / np.where(norms > 0, norms, 1.0)


def _structure_seed(S: SummationOperator) -> int:
    digest = hashlib.sha256(np.ascontiguousarray(S.tree.parent).tobytes())
    digest.update(f"{S.p}|{S.q}".encode())
    return int.from_bytes(digest.digest()[:8], "little")


def norm_estimate(
    S: SummationOperator,
    restarts: int | None = None,
    seed: int | None = None,
    settings: Settings | None = None,
) -> NormEstimate:
    """Certified lower bound on ||S||_{p->q} by multistart duality-map ascent.

    Each start iterates x <- J_{p'}(S^T J_q(S x)) over nonnegative vectors,
    where J_r maps a vector to the direction attaining its l_r norm, and keeps
    a step only if ||Sx||_q / ||x||_p improves. Starts are the all-ones vector,
    every basis vector on small trees and ``restarts`` random positive vectors.
    The default seed depends on the tree and exponents only, so rescaling the
    weights rescales the result exactly.
    """
    settings = settings or get_settings()
    restarts = settings.norm_restarts if restarts is None else restarts
    rng = np.random.default_rng(_structure_seed(S) if seed is None else seed)
    size = S.size
    p, q = S.p, S.q
    p_dual = p.dual()

    columns = [np.ones((size, 1))]
    if size <= settings.basis_start_max_vertices:
        columns.append(np.eye(size))
    if restarts > 0:
        columns.append(rng.uniform(0.05, 1.0, size=(size, restarts)))
    x = _normalise(np.hstack(columns), p)

    def value_of(batch: np.ndarray) -> np.ndarray:
        return row_norms(apply(S, batch).T, q)

    best = value_of(x)
    for _ in range(settings.norm_ascent_steps):
        y = apply(S, x)
        z = adjoint(S, _dual_direction(y, q))
        candidate = _normalise(_dual_direction(z, p_dual), p)
        values = value_of(candidate)
        improved = values > best * (1.0 + 1e-15)
        if not np.any(improved):
            break
        x[:, improved] = candidate[:, improved]
        best = np.where(improved, values, best)

    winner = int(np.argmax(best))
    logger.debug(
        "Norm estimated",
        vertices=size,
        p=str(p),
        q=str(q),
        starts=int(x.shape[1]),
        value=float(best[winner]),
    )
    return NormEstimate(
        lower_bound=float(best[winner]),
        witness=x[:, winner].copy(),
        starts=int(x.shape[1]),
        best_start=winner,
    )


def operator_norm(S: SummationOperator, settings: Settings | None = None) -> NormResult:
    """Exact norm where available, otherwise the ascent lower bound."""
    try:
        return norm_exact(S, settings)
    except UnsupportedRegimeException:
        estimate = norm_estimate(S, settings=settings)
        return NormResult(
            value=estimate.lower_bound,
            lower=estimate.lower_bound,
            upper=np.inf,
            method=NormMethod.ASCENT,
        )
