"""Random trees for fuzzing."""

from __future__ import annotations

import numpy as np

from entropylab.app.core.exceptions import ValidationException
from entropylab.app.services.trees.models import RootedTree


def random_tree(seed: int, V: int, k: int) -> RootedTree:
    """Uniform attachment tree on V vertices with at most k children per vertex.

    Each new vertex picks its parent uniformly among the vertices that still
    have fewer than k children.
    """
    if V < 1 or k < 1:
        raise ValidationException("random_tree needs V >= 1 and k >= 1", field="V")

    rng = np.random.default_rng(seed)
    parents = np.full(V, -1, dtype=np.int64)
    fill = np.zeros(V, dtype=np.int64)
    open_slots = [0]
    draws = rng.random(V)
    for v in range(1, V):
        pick = int(draws[v] * len(open_slots))
        par = open_slots[pick]
        parents[v] = par
        fill[par] += 1
        if fill[par] == k:
            open_slots[pick] = open_slots[-1]
            open_slots.pop()
        open_slots.append(v)
    return RootedTree.from_parents(parents, max_branching=k)


def random_weights(seed: int, size: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """Seeded nonnegative vertex weights, at least one of them positive."""
    rng = np.random.default_rng(seed)
    phi = rng.uniform(low, high, size=size)
    if not np.any(phi > 0):
        phi[0] = 1.0
    return phi
