"""h-set profiles and trees whose level populations follow them."""

from __future__ import annotations

import math

import numpy as np
import structlog

from entropylab.app.config import Settings, get_settings
from entropylab.app.core.exceptions import (
    InfeasibleProfileException,
    ScaleException,
    ValidationException,
)
from entropylab.app.services.trees.models import (
    GeneratedTree,
    HSetProfile,
    HSetReport,
    RootedTree,
)

logger = structlog.get_logger(__name__)

_RATIO_TOL = 1e-9


def h_eval(profile: HSetProfile, t: float) -> float:
    """h(t) for 0 < t <= 1; DomainException outside that range."""
    return profile.h(t)


def profile_preset(name: str) -> HSetProfile:
    """Shipped profiles: binary, koch, log and lipschitz-<k>."""
    key = name.strip().lower()
    if key == "binary":
        return HSetProfile(theta=1.0, c_star=1.0, t_floor=1.0, name="binary")
    if key == "koch":
        return HSetProfile(theta=math.log(4) / math.log(3), t_floor=1.0, name="koch")
    if key == "log":
        return HSetProfile(theta=0.0, gamma=-1.0, name="log")
    if key.startswith("lipschitz-"):
        try:
            order = float(key.split("-", 1)[1])
        except ValueError as e:
            raise ValidationException(f"Unknown profile {name!r}", field="profile") from e
        return HSetProfile(theta=order, t_floor=1.0, name=key)
    raise ValidationException(
        f"Unknown profile {name!r}; use binary, koch, log or lipschitz-<k>", field="profile"
    )


def level_targets(profile: HSetProfile, J: int) -> np.ndarray:
    """H_j = h(1) / h(2^(-m_star j)) for j = 0..J."""
    h = np.array([profile.at_level(j) for j in range(J + 1)], dtype=float)
    if np.any(~np.isfinite(h)) or np.any(h <= 0):
        raise InfeasibleProfileException(
            f"Profile {profile.name} is not positive on levels 0..{J}"
        )
    targets = h[0] / h
    if np.any(np.diff(targets) < -_RATIO_TOL * targets[1:]):
        raise InfeasibleProfileException(
            f"Profile {profile.name} is not nondecreasing on (0, 1]",
            suggestion="Pick gamma and nu so that h grows with t, or raise t_floor.",
        )
    return targets


def generate_hset_tree(
    profile: HSetProfile,
    J: int,
    settings: Settings | None = None,
) -> GeneratedTree:
    """Grow a tree of depth J whose subtrees follow the profile's ratios.

    Every vertex carries a share of the root's measure. A vertex at level t with
    share s gets max(1, round(s * H_{t+1})) children, which split the share
    evenly. Shares stay within a factor 3/2 of 1/H_t, so
    card V_l(v) lies within a factor 3 of H_{j+l} / H_j.
    """
    settings = settings or get_settings()
    if J < 0:
        raise ValidationException("Depth J must be nonnegative", field="J")
    if J > settings.max_tree_depth:
        raise ScaleException(
            f"Tree depth {J} exceeds {settings.max_tree_depth}",
            limit=f"J <= {settings.max_tree_depth}",
        )

    targets = level_targets(profile, J)
    predicted = float(targets.sum())
    if predicted > settings.max_tree_vertices:
        raise InfeasibleProfileException(
            f"Profile {profile.name} at depth {J} predicts {predicted:.3g} vertices",
            suggestion=f"Lower J so that at most {settings.max_tree_vertices} vertices are needed.",
        )

    parents = [np.array([-1], dtype=np.int64)]
    shares = np.ones(1)
    ids = np.zeros(1, dtype=np.int64)
    next_id = 1
    deficient = 0
    for t in range(J):
        demand = shares * targets[t + 1]
        deficient += int(np.count_nonzero(demand < 0.5))
        counts = np.maximum(1, np.floor(demand + 0.5)).astype(np.int64)
        total = int(counts.sum())
        if next_id + total > settings.max_tree_vertices:
            raise InfeasibleProfileException(
                f"Profile {profile.name} exceeded {settings.max_tree_vertices} vertices at level {t + 1}"
            )
        parents.append(np.repeat(ids, counts))
        shares = np.repeat(shares / counts, counts)
        ids = np.arange(next_id, next_id + total, dtype=np.int64)
        next_id += total

    tree = RootedTree.from_parents(np.concatenate(parents))
    if deficient:
        logger.warning("Branching target below one half", profile=profile.name, vertices=deficient)
    logger.debug(
        "h-set tree generated",
        profile=profile.name,
        depth=J,
        vertices=tree.size,
        predicted=round(predicted, 3),
    )
    return GeneratedTree(tree=tree, profile=profile, targets=targets, deficient_vertices=deficient)


def verify_hset_condition(
    tree: RootedTree,
    profile: HSetProfile,
    sample: int | None = None,
    c_star: float | None = None,
    seed: int = 0,
    settings: Settings | None = None,
) -> HSetReport:
    """Check c*^-1 <= card V_l(v) h(2^(-m(j+l))) / h(2^(-mj)) <= c* for j + l <= depth.

    All (vertex, l) pairs are checked when there are at most ``sample`` of
    them; otherwise ``sample`` pairs are drawn with a seeded generator.
    """
    settings = settings or get_settings()
    sample = sample or settings.hset_sample
    c_star = profile.c_star if c_star is None else c_star
    J = tree.depth

    h = np.array([profile.at_level(j) for j in range(J + 1)], dtype=float)
    span = J - tree.level + 1
    total_pairs = int(span.sum())

    exhaustive = total_pairs <= sample
    if exhaustive:
        vertices = np.repeat(np.arange(tree.size, dtype=np.int64), span)
        offsets = np.concatenate([[0], np.cumsum(span)[:-1]])
        depths = np.arange(total_pairs, dtype=np.int64) - np.repeat(offsets, span)
    else:
        rng = np.random.default_rng(seed)
        vertices = rng.integers(0, tree.size, size=sample)
        depths = np.floor(rng.random(sample) * span[vertices]).astype(np.int64)

    counts = tree.descendant_counts(vertices, depths)
    levels = tree.level[vertices]
    ratios = counts * h[levels + depths] / h[levels]

    hi, lo = int(np.argmax(ratios)), int(np.argmin(ratios))
    max_ratio, min_ratio = float(ratios[hi]), float(ratios[lo])
    worst = hi if max_ratio * min_ratio >= 1.0 else lo
    passed = max_ratio <= c_star * (1 + _RATIO_TOL) and min_ratio * c_star >= 1 - _RATIO_TOL

    logger.debug(
        "h-set condition checked",
        profile=profile.name,
        pairs=int(ratios.size),
        max_ratio=max_ratio,
        min_ratio=min_ratio,
        passed=passed,
    )
    return HSetReport(
        max_ratio=max_ratio,
        min_ratio=min_ratio,
        c_star=c_star,
        passed=bool(passed),
        pairs_checked=int(ratios.size),
        worst_vertex=int(vertices[worst]),
        worst_depth=int(depths[worst]),
        exhaustive=exhaustive,
    )


