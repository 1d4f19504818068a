"""Certified brute-force brackets for entropy numbers of small matrices.

e_k(T) is the smallest radius at which 2^(k-1) balls of l_q cover T(B_p).
The oracle works on the image of a ball net: a covering of the image plus the
net correction ``norm_bound * mesh`` gives an upper bound, and N + 1 image
points that are pairwise more than 2r apart give the lower bound r.
"""

from __future__ import annotations

import hashlib
import itertools
import math

import numpy as np
import structlog

from entropylab.app.config import Settings, get_settings
from entropylab.app.core.exceptions import ScaleException
from entropylab.app.services.entropy.calculus import bound_compose, bound_sum
from entropylab.app.services.entropy.models import (
    BoundSequence,
    EntropyInterval,
    OperatorMatrix,
    OracleMethod,
)
from entropylab.app.services.spaces import (
    Exponent,
    pairwise_distances,
    row_norms,
    unit_ball_net,
)

logger = structlog.get_logger(__name__)

# Matrices are normalised by their largest entry and rounded before the net is
# mapped, so T and any positive multiple of T produce bit-identical images.
_UNIT_DECIMALS = 10
_BISECTION_STEPS = 200
_BLOCK_CELLS = 4_000_000


def norm_upper_bound(T: OperatorMatrix, settings: Settings | None = None) -> float:
    """Certified upper bound on ||T||_{p->q}.

    For p = 1 this is the exact largest column norm. Otherwise it is the
    smaller of dim^(1-1/p) times that column norm and the exact ||T||_{inf->q}
    read off the cube vertices, which dominates every ||T||_{p->q}.
    """
    settings = settings or get_settings()
    column = float(row_norms(T.entries.T, T.target_q).max())
    p = T.source_p
    if p.finite == 1.0:
        return column

    bound = T.source_dim ** (1.0 - p.reciprocal) * column
    if T.source_dim <= settings.cube_vertex_max_dim:
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=T.source_dim)))
        cube = float(row_norms(signs @ T.entries.T, T.target_q).max())
        bound = min(bound, cube * (1.0 + 1e-12))
    return bound


def entropy_oracle(
    T: OperatorMatrix,
    k: int,
    mesh: float,
    restarts: int | None = None,
    settings: Settings | None = None,
) -> EntropyInterval:
    """Bracket e_k(T) using a ball net of the given mesh.

    Args:
        T: Operator with source dimension at most 4
        k: Entropy index, 1 <= k <= 12
        mesh: Net mesh in (0, 0.5]
        restarts: Farthest-point traversals (default from settings)
        settings: Optional settings override

    Returns:
        EntropyInterval with lower <= e_k(T) <= upper
    """
    settings = settings or get_settings()
    _check_scale(T, k, mesh, settings)
    restarts = restarts or settings.oracle_packing_restarts

    if T.is_zero:
        return EntropyInterval(k, 0.0, 0.0, mesh, 0.0, method=OracleMethod.ZERO)

    centers = 2 ** (k - 1)
    norm_bound = norm_upper_bound(T, settings)
    peak = float(np.max(np.abs(T.entries)))
    unit = np.round(T.entries / peak, _UNIT_DECIMALS)
    # l_q displacement of any unit-ball image caused by the rounding above
    drift = 0.5 * 10.0**-_UNIT_DECIMALS * T.source_dim * T.target_dim

    net = unit_ball_net(T.source_dim, T.source_p, mesh, settings)

    if T.source_dim == 1:
        cover, separation = _line_bracket(net.points[:, 0], centers)
        length = float(row_norms(unit.T, T.target_q)[0])
        cover *= length
        separation *= length
        method = OracleMethod.LINE
    else:
        image = net.points @ unit.T
        seed = _seed_for(unit, T, k, mesh)
        cover, separation = _farthest_point_bracket(
            image, centers, T.target_q, restarts, settings.oracle_refine_rounds, seed
        )
        method = OracleMethod.FARTHEST_POINT

    upper = peak * (cover + drift) + norm_bound * mesh
    lower = peak * max(0.5 * separation - drift, 0.0)
    lower = min(lower, upper)

    logger.debug(
        "Oracle bracket computed",
        k=k,
        mesh=mesh,
        method=method.value,
        net_points=net.size,
        lower=lower,
        upper=upper,
    )
    return EntropyInterval(k, lower, upper, mesh, norm_bound, method=method)


def entropy_profile(
    T: OperatorMatrix,
    ks: list[int],
    mesh: float,
    settings: Settings | None = None,
) -> list[EntropyInterval]:
    """Oracle brackets for several k, post-processed to be nonincreasing."""
    intervals = [entropy_oracle(T, k, mesh, settings=settings) for k in sorted(ks)]
    tightened: list[EntropyInterval] = []
    best_upper = math.inf
    for interval in intervals:
        best_upper = min(best_upper, interval.upper)
        tightened.append(
            EntropyInterval(
                interval.k,
                min(interval.lower, best_upper),
                best_upper,
                interval.net_mesh,
                interval.norm_bound,
                interval.method,
            )
        )
    return tightened


def entropy_oracle_coarsened(
    T: OperatorMatrix,
    k: int,
    mesh: float,
    settings: Settings | None = None,
) -> EntropyInterval:
    """entropy_oracle, doubling the mesh while the ball net exceeds the size guard."""
    settings = settings or get_settings()
    _check_scale(T, k, mesh, settings)
    while True:
        try:
            return entropy_oracle(T, k, mesh, settings=settings)
        except ScaleException:
            if 2 * mesh > settings.oracle_max_mesh:
                raise
            mesh *= 2
            logger.debug("Ball net too large, coarsening mesh", k=k, mesh=mesh)


def _check_scale(T: OperatorMatrix, k: int, mesh: float, settings: Settings) -> None:
    if T.source_dim > settings.oracle_max_dim:
        raise ScaleException(
            f"Oracle source dimension {T.source_dim} exceeds {settings.oracle_max_dim}",
            limit=f"source dim <= {settings.oracle_max_dim}",
        )
    if not 1 <= k <= settings.oracle_max_k:
        raise ScaleException(
            f"Entropy index {k} outside 1..{settings.oracle_max_k}",
            limit=f"1 <= k <= {settings.oracle_max_k}",
        )
    if not 0.0 < mesh <= settings.oracle_max_mesh:
        raise ScaleException(
            f"Mesh {mesh} outside (0, {settings.oracle_max_mesh}]",
            limit=f"0 < mesh <= {settings.oracle_max_mesh}",
        )


def _seed_for(unit: np.ndarray, T: OperatorMatrix, k: int, mesh: float) -> int:
    digest = hashlib.sha256(np.ascontiguousarray(unit).tobytes())
    digest.update(f"{unit.shape}|{T.source_p}|{T.target_q}|{k}|{mesh!r}".encode())
    return int.from_bytes(digest.digest()[:8], "little")


# =============================================================================
# One-dimensional images
# =============================================================================


def _line_bracket(t: np.ndarray, centers: int) -> tuple[float, float]:
    """Optimal covering radius and packing separation of points on a line.

    Returns (r, d): the points are covered by ``centers`` intervals of
    half-width r, and ``centers + 1`` of them have consecutive gaps >= d.
    """
    t = np.unique(t)
    if t.size <= centers:
        cover = 0.0
    else:
        lo, hi = 0.0, 0.5 * float(t[-1] - t[0])
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if _intervals_needed(t, mid) <= centers:
                hi = mid
            else:
                lo = mid
        cover = hi

    if t.size < centers + 1:
        return cover, 0.0
    lo, hi = 0.0, float(t[-1] - t[0])
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _greedy_packing(t, mid) >= centers + 1:
            lo = mid
        else:
            hi = mid
    return cover, lo


def _intervals_needed(t: np.ndarray, radius: float) -> int:
    count, i = 0, 0
    while i < t.size:
        count += 1
        i = int(np.searchsorted(t, t[i] + 2.0 * radius, side="right"))
    return count


def _greedy_packing(t: np.ndarray, gap: float) -> int:
    count, i = 0, 0
    while i < t.size:
        count += 1
        i = int(np.searchsorted(t, t[i] + gap, side="left"))
    return count


# =============================================================================
# General images: farthest-point traversal
# =============================================================================


def _farthest_point_bracket(
    image: np.ndarray,
    centers: int,
    q: Exponent,
    restarts: int,
    refine_rounds: int,
    seed: int,
) -> tuple[float, float]:
    """Best covering radius and packing separation over several traversals.

    After N centers of a farthest-point traversal the covering radius equals
    the distance at which the (N+1)-th point is chosen, and that point together
    with the first N is a packing with exactly that separation.
    """
    if image.shape[0] <= centers:
        return 0.0, 0.0

    rng = np.random.default_rng(seed)
    starts = [int(np.argmin(row_norms(image, q)))]
    starts += [int(i) for i in rng.integers(0, image.shape[0], size=max(restarts - 1, 0))]

    traversals: list[tuple[float, list[int]]] = []
    for start in starts:
        chosen, radius = _traverse(image, start, centers, q)
        traversals.append((radius, chosen))

    separation = max(radius for radius, _ in traversals)
    traversals.sort(key=lambda item: (item[0], item[1][0]))
    cover = traversals[0][0]

    if image.shape[0] * centers <= 50 * _BLOCK_CELLS:
        for radius, chosen in traversals[:3]:
            refined = _refine(image, image[chosen[:centers]], q, refine_rounds, radius)
            cover = min(cover, refined)

    return cover, separation


def _traverse(image: np.ndarray, start: int, centers: int, q: Exponent) -> tuple[list[int], float]:
    chosen = [start]
    dist = pairwise_distances(image, image[start], q)[:, 0]
    for _ in range(centers - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, pairwise_distances(image, image[nxt], q)[:, 0])
    radius = float(dist.max())
    chosen.append(int(np.argmax(dist)))
    return chosen, radius


def _nearest(image: np.ndarray, centers: np.ndarray, q: Exponent) -> tuple[np.ndarray, np.ndarray]:
    rows = max(1, _BLOCK_CELLS // centers.shape[0])
    dist = np.empty(image.shape[0])
    owner = np.empty(image.shape[0], dtype=int)
    for start in range(0, image.shape[0], rows):
        block = pairwise_distances(image[start : start + rows], centers, q)
        owner[start : start + rows] = np.argmin(block, axis=1)
        dist[start : start + rows] = block.min(axis=1)
    return dist, owner


def _refine(
    image: np.ndarray,
    centers: np.ndarray,
    q: Exponent,
    rounds: int,
    radius: float,
) -> float:
    """Minimax refinement: move every center to the middle of its cluster's box.

    The box middle is the Chebyshev center for q = ∞ and a heuristic move
    otherwise; a round is kept only if the covering radius shrinks.
    """
    centers = centers.copy()
    best = radius
    for _ in range(rounds):
        _, owner = _nearest(image, centers, q)
        lo = np.full_like(centers, np.inf)
        hi = np.full_like(centers, -np.inf)
        np.minimum.at(lo, owner, image)
        np.maximum.at(hi, owner, image)
        moved = np.where(np.isfinite(lo), 0.5 * (lo + hi), centers)
        dist, _ = _nearest(image, moved, q)
        candidate = float(dist.max())
        if candidate >= best * (1.0 - 1e-12):
            break
        centers, best = moved, candidate
    return best


def calculus_margins(
    S: OperatorMatrix,
    T: OperatorMatrix,
    K: int,
    mesh: float = 0.1,
    settings: Settings | None = None,
) -> list[dict]:
    """Compare the sum and composition rules against oracle uppers of S + T and S∘T.

    Both rules are fed the oracle uppers of S and T. For every k <= K the
    rule's bound must reach the oracle upper of the combined operator less
    that oracle's own net correction ``norm_bound * mesh``; ``margin`` is
    bound minus that corrected upper, so a negative margin is a violation.
    """
    settings = settings or get_settings()

    def uppers(op: OperatorMatrix) -> list[EntropyInterval]:
        return [entropy_oracle_coarsened(op, k, mesh, settings) for k in range(1, K + 1)]

    a = BoundSequence(tuple(i.upper for i in uppers(S)))
    b = BoundSequence(tuple(i.upper for i in uppers(T)))
    rules = {
        "sum": (bound_sum(a, b), S + T),
        "compose": (
            bound_compose(a, b, norm_upper_bound(S, settings), norm_upper_bound(T, settings)),
            S.compose(T),
        ),
    }
    rows = []
    for rule, (bounds, combined) in rules.items():
        intervals = uppers(combined)
        best = BoundSequence(tuple(i.upper for i in intervals))
        for interval in intervals:
            correction = interval.norm_bound * interval.net_mesh
            bound = bounds.at(interval.k)
            upper = best.at(interval.k)
            rows.append(
                {
                    "rule": rule,
                    "k": interval.k,
                    "bound": bound,
                    "oracle_upper": upper,
                    "correction": correction,
                    "margin": bound - (upper - correction),
                }
            )
    return rows
