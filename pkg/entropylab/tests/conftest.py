"""Pytest fixtures for testing."""

import numpy as np
import pytest

from entropylab.app.config import Settings
from entropylab.app.services.trees import RootedTree, VertexWeighting


@pytest.fixture
def settings() -> Settings:
    """Library settings with small acceptance campaigns."""
    return Settings(
        acceptance_fuzz_trees=8,
        acceptance_fuzz_max_vertices=300,
        acceptance_sumop_trees=6,
        acceptance_sumop_max_vertices=24,
        acceptance_operator_pairs=4,
        acceptance_scale_operators=3,
        acceptance_block_trees=3,
        norm_restarts=16,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data."""
    return np.random.default_rng(20240601)


@pytest.fixture
def binary_tree() -> RootedTree:
    """Full binary tree of depth 4 (31 vertices)."""
    return RootedTree.full(2, 4)


@pytest.fixture
def chain16() -> RootedTree:
    """Path with 16 vertices."""
    return RootedTree.chain(16)


@pytest.fixture
def uniform_weights():
    """Factory for phi = 1 on every vertex."""

    def make(tree: RootedTree) -> VertexWeighting:
        return VertexWeighting.uniform(tree.size)

    return make
