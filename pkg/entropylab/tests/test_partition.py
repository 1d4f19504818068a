"""Tests for balanced tree partitions and their verification."""

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from entropylab.app.core.exceptions import ValidationException, ZeroWeightException
from entropylab.app.services.trees import (
    BalancedPartitionReport,
    RootedTree,
    TreePartition,
    VertexWeighting,
    dyadic_chain,
    partition_balanced,
    random_tree,
    random_weights,
    verify_dyadic_chain,
    verify_partition_lemma,
)


def _hand_report(tree: RootedTree, parts: list[list[int]], n: int) -> BalancedPartitionReport:
    partition = TreePartition.from_parts(tree, parts)
    return BalancedPartitionReport(
        parts=partition,
        n=n,
        k=tree.max_branching,
        parts_count=len(partition),
        max_nonsingleton_phi=0.0,
        phi_total=float(tree.size),
        witness_C=len(partition) / n,
    )


class TestPartitionBalanced:
    """Test the threshold sweep."""

    def test_chain_midpoint(self):
        """Test a chain of ten splits into two halves of weight five."""
        tree = RootedTree.chain(10)
        report = partition_balanced(tree, VertexWeighting.uniform(10), 2)
        assert report.parts.parts == (tuple(range(5)), tuple(range(5, 10)))
        assert report.max_nonsingleton_phi == pytest.approx(5.0)
        assert report.witness_C == pytest.approx(1.0)
        assert report.parts.succession(tree) == (-1, 0)

    def test_star_single_part(self):
        """Test n = 1 keeps a star whole."""
        tree = RootedTree.star(5)
        report = partition_balanced(tree, VertexWeighting.uniform(6), 1)
        assert report.parts_count == 1
        assert report.max_nonsingleton_phi == pytest.approx(6.0)

    def test_many_parts_gives_singletons(self, binary_tree):
        """Test n >= V forces singletons."""
        report = partition_balanced(binary_tree, VertexWeighting.uniform(31), 31)
        assert report.parts_count == 31
        assert report.max_nonsingleton_phi == 0.0
        assert verify_partition_lemma(report, binary_tree, VertexWeighting.uniform(31)).passed

    def test_threshold_is_total_over_n(self):
        """Test the sweep threshold recorded in the report is Phi_total / n."""
        tree = RootedTree.chain(12)
        for n in (1, 3, 4):
            report = partition_balanced(tree, VertexWeighting.uniform(12), n)
            assert report.threshold == pytest.approx(12.0 / n)
            assert report.to_dict()["threshold"] == pytest.approx(12.0 / n)

    def test_heavy_vertex_is_singleton(self):
        """Test a vertex heavier than the threshold stands alone."""
        tree = RootedTree.chain(5)
        weighting = VertexWeighting(np.array([1.0, 1.0, 10.0, 1.0, 1.0]))
        report = partition_balanced(tree, weighting, 2)
        assert (2,) in report.parts.parts
        assert verify_partition_lemma(report, tree, weighting).passed

    def test_deterministic(self):
        """Test identical inputs give identical partitions."""
        tree = random_tree(3, 500, 3)
        weighting = VertexWeighting(random_weights(3, 500))
        a = partition_balanced(tree, weighting, 16)
        b = partition_balanced(tree, weighting, 16)
        assert np.array_equal(a.parts.part_of, b.parts.part_of)

    def test_zero_weight(self):
        """Test an all-zero weighting is refused."""
        with pytest.raises(ZeroWeightException):
            VertexWeighting(np.zeros(4))

    def test_bad_inputs(self, chain16):
        """Test mismatched weights and n = 0 are refused."""
        with pytest.raises(ValidationException):
            partition_balanced(chain16, VertexWeighting.uniform(3), 2)
        with pytest.raises(ValidationException):
            partition_balanced(chain16, VertexWeighting.uniform(16), 0)

    @hyp_settings(max_examples=40, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32),
        st.integers(min_value=1, max_value=400),
        st.sampled_from([2, 3, 5]),
        st.integers(min_value=0, max_value=9),
    )
    def test_lemma_conditions(self, seed, V, k, log_n):
        """Test weight and count bounds on random trees and weights."""
        tree = random_tree(seed, V, k)
        weighting = VertexWeighting(random_weights(seed, V))
        n = min(2**log_n, V)
        report = partition_balanced(tree, weighting, n)
        verdict = verify_partition_lemma(report, tree, weighting)
        assert verdict.passed, verdict.violations
        assert report.parts_count <= (2 * k + 4) * n
        assert report.max_nonsingleton_phi <= (k + 2) * weighting.total / n * (1 + 1e-9)


class TestDyadicChain:
    """Test nested partitions for n = 1, 2, 4, ..."""

    def test_chain_nesting(self, chain16):
        """Test a chain of sixteen nests over three levels."""
        weighting = VertexWeighting.uniform(16)
        reports = dyadic_chain(chain16, weighting, 2)
        assert [r.n for r in reports] == [1, 2, 4]
        verdict = verify_dyadic_chain(reports, chain16, weighting)
        assert verdict.passed, verdict.violations
        assert verdict.max_intersections >= 1

    def test_level_thresholds(self, chain16):
        """Test level n of the chain sweeps with Phi_total / n."""
        reports = dyadic_chain(chain16, VertexWeighting.uniform(16), 3)
        assert [r.threshold for r in reports] == pytest.approx([16.0, 8.0, 4.0, 2.0])

    def test_single_vertex(self):
        """Test a lone vertex stays one singleton at every level."""
        tree = RootedTree.from_parents([-1])
        reports = dyadic_chain(tree, VertexWeighting.uniform(1), 3)
        assert all(r.parts.parts == ((0,),) for r in reports)

    def test_binary_tree(self, binary_tree, uniform_weights):
        """Test the depth-4 binary tree passes every check."""
        weighting = uniform_weights(binary_tree)
        reports = dyadic_chain(binary_tree, weighting, 3)
        assert verify_dyadic_chain(reports, binary_tree, weighting).passed

    def test_negative_depth(self, chain16):
        """Test a negative chain depth is refused."""
        with pytest.raises(ValidationException):
            dyadic_chain(chain16, VertexWeighting.uniform(16), -1)

    @hyp_settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32), st.sampled_from([2, 3, 5]))
    def test_random_nesting(self, seed, k):
        """Test every finer part lies in exactly one coarser part."""
        tree = random_tree(seed, 300, k)
        weighting = VertexWeighting(random_weights(seed + 1, 300))
        reports = dyadic_chain(tree, weighting, 6)
        verdict = verify_dyadic_chain(reports, tree, weighting)
        assert verdict.passed, verdict.violations


class TestVerifyPartitionLemma:
    """Test the independent re-check."""

    def test_disconnected_part(self):
        """Test a part skipping a vertex is reported."""
        tree = RootedTree.chain(4)
        report = _hand_report(tree, [[0, 2], [1], [3]], 2)
        verdict = verify_partition_lemma(report, tree, VertexWeighting.uniform(4))
        assert not verdict.passed
        assert any("connectivity" in v for v in verdict.violations)

    def test_two_singletons(self):
        """Test a two-vertex tree split into singletons passes."""
        tree = RootedTree.chain(2)
        report = _hand_report(tree, [[0], [1]], 1)
        assert verify_partition_lemma(report, tree, VertexWeighting.uniform(2)).passed

    def test_uncovered_vertex(self):
        """Test a missing vertex breaks the disjoint cover."""
        tree = RootedTree.chain(3)
        report = _hand_report(tree, [[0, 1]], 1)
        verdict = verify_partition_lemma(report, tree, VertexWeighting.uniform(3))
        assert not verdict.passed
        assert "disjoint cover" in verdict.violations[0]

    def test_overweight_part(self):
        """Test condition 1 flags a part above (k + 2) Phi / n."""
        tree = RootedTree.chain(12)
        report = _hand_report(tree, [list(range(11)), [11]], 4)
        verdict = verify_partition_lemma(report, tree, VertexWeighting.uniform(12))
        assert any("condition 1" in v for v in verdict.violations)
