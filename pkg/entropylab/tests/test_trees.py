"""Tests for rooted trees, h-set profiles and tree serialization."""

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from entropylab.app.config import Settings
from entropylab.app.core.exceptions import (
    DomainException,
    InfeasibleProfileException,
    ScaleException,
    UnknownVertexException,
    ValidationException,
)
from entropylab.app.services.trees import (
    HSetProfile,
    RootedTree,
    TauKind,
    TreePartition,
    dump_operator,
    dump_partition,
    dump_tree,
    generate_hset_tree,
    h_eval,
    level_targets,
    load_operator,
    load_partition,
    load_tree,
    profile_preset,
    random_tree,
    verify_hset_condition,
)


class TestRootedTree:
    """Test tree construction and queries."""

    def test_levels_and_counts(self, binary_tree):
        """Test level populations of the depth-4 binary tree."""
        assert binary_tree.size == 31
        assert binary_tree.depth == 4
        assert binary_tree.level_counts().tolist() == [1, 2, 4, 8, 16]
        assert int(binary_tree.level_counts().sum()) == binary_tree.size

    def test_descendants_at_depth(self, binary_tree):
        """Test card V_l for the root, a leaf and l = 0."""
        assert binary_tree.descendants_at_depth(binary_tree.root, 2) == 4
        leaf = int(binary_tree.vertices_at_level(4)[0])
        assert binary_tree.descendants_at_depth(leaf, 1) == 0
        assert binary_tree.descendants_at_depth(leaf, 0) == 1

    def test_subtree_at_root(self, binary_tree):
        """Test the subtree of the root is every vertex."""
        assert binary_tree.subtree_at(binary_tree.root) == frozenset(range(31))

    def test_subtree_matches_ancestry(self, binary_tree):
        """Test subtree membership agrees with the preorder intervals."""
        v = 1
        members = binary_tree.subtree_at(v)
        for w in range(binary_tree.size):
            assert (w in members) == binary_tree.is_ancestor(v, w)

    def test_unknown_vertex(self, binary_tree):
        """Test queries on a missing vertex raise."""
        with pytest.raises(UnknownVertexException):
            binary_tree.descendants_at_depth(99, 1)
        with pytest.raises(UnknownVertexException):
            binary_tree.subtree_at(-1)

    @pytest.mark.parametrize(
        "parents",
        [[], [-1, -1], [1, 0], [-1, 5]],
    )
    def test_invalid_parent_arrays(self, parents):
        """Test empty, multi-root, cyclic and out-of-range parent arrays."""
        with pytest.raises(ValidationException):
            RootedTree.from_parents(parents)

    def test_branching_bound(self):
        """Test a star violates a smaller branching bound."""
        with pytest.raises(ValidationException):
            RootedTree.from_parents([-1, 0, 0, 0], max_branching=2)

    def test_vectorised_counts(self, binary_tree):
        """Test descendant_counts agrees with the scalar query."""
        vertices = np.array([0, 1, 2, 5, 10])
        depths = np.array([3, 1, 2, 1, 0])
        expected = [binary_tree.descendants_at_depth(v, l) for v, l in zip(vertices, depths)]
        assert binary_tree.descendant_counts(vertices, depths).tolist() == expected


class TestRandomTree:
    """Test the fuzzing tree generator."""

    def test_single_vertex(self):
        """Test V = 1 gives a lone root."""
        tree = random_tree(3, 1, 4)
        assert tree.size == 1
        assert tree.depth == 0

    def test_chain(self):
        """Test branching 1 forces a path."""
        tree = random_tree(7, 100, 1)
        assert tree.depth == 99

    def test_branching_cap(self):
        """Test no vertex exceeds k children."""
        tree = random_tree(7, 1000, 3)
        assert max(len(c) for c in tree.children_of) <= 3
        assert tree.max_branching == 3

    def test_deterministic(self):
        """Test the same seed gives the same tree."""
        assert np.array_equal(random_tree(11, 200, 2).parent, random_tree(11, 200, 2).parent)

    def test_rejects_empty(self):
        """Test V = 0 is refused."""
        with pytest.raises(ValidationException):
            random_tree(1, 0, 2)


class TestHEval:
    """Test the h-set gauge function."""

    def test_pure_power(self):
        """Test theta = 1 gives h(t) = t."""
        assert h_eval(HSetProfile(theta=1.0), 2.0**-3) == pytest.approx(2.0**-3)

    def test_pure_log(self):
        """Test theta = 0, gamma = 1 gives |log2 t|."""
        assert h_eval(HSetProfile(theta=0.0, gamma=1.0), 2.0**-4) == pytest.approx(4.0)

    def test_mixed(self):
        """Test theta = gamma = 1 at t = 1/4."""
        assert h_eval(HSetProfile(theta=1.0, gamma=1.0), 0.25) == pytest.approx(0.5)

    def test_log_power_tau(self):
        """Test tau(y) = log2(y + 2)^nu."""
        profile = HSetProfile(theta=1.0, tau_kind=TauKind.LOG_POWER, nu=2.0)
        assert h_eval(profile, 2.0**-6) == pytest.approx(2.0**-6 * 3.0**2)

    def test_constant_above_floor(self):
        """Test h is constant on (t_floor, 1]."""
        profile = HSetProfile(theta=1.0, t_floor=0.25)
        assert h_eval(profile, 0.5) == h_eval(profile, 1.0) == pytest.approx(0.25)

    @pytest.mark.parametrize("t", [0.0, -0.5, 1.5])
    def test_domain(self, t):
        """Test t outside (0, 1] is refused."""
        with pytest.raises(DomainException):
            h_eval(HSetProfile(theta=1.0), t)

    def test_profile_validation(self):
        """Test negative theta and gamma with t_floor = 1 are refused."""
        with pytest.raises(ValidationException):
            HSetProfile(theta=-1.0)
        with pytest.raises(ValidationException):
            HSetProfile(theta=0.0, gamma=1.0, t_floor=1.0)

    def test_presets(self):
        """Test the shipped presets."""
        assert profile_preset("binary").theta == 1.0
        assert profile_preset("koch").theta == pytest.approx(np.log(4) / np.log(3))
        assert profile_preset("lipschitz-2").theta == 2.0
        assert profile_preset("log").gamma == -1.0
        with pytest.raises(ValidationException):
            profile_preset("cantor")


class TestGenerateHSetTree:
    """Test h-set tree generation and verification."""

    def test_binary_profile_gives_binary_tree(self):
        """Test theta = 1 at depth 4 builds the full binary tree."""
        generated = generate_hset_tree(profile_preset("binary"), 4)
        assert generated.tree.level_counts().tolist() == [1, 2, 4, 8, 16]
        report = verify_hset_condition(generated.tree, generated.profile)
        assert report.passed
        assert report.max_ratio == pytest.approx(1.0)
        assert report.min_ratio == pytest.approx(1.0)
        assert report.exhaustive

    def test_depth_zero(self):
        """Test J = 0 gives a single root."""
        assert generate_hset_tree(profile_preset("binary"), 0).tree.size == 1

    @pytest.mark.parametrize("preset, depth", [("log", 12), ("koch", 7), ("lipschitz-2", 4)])
    def test_presets_pass_own_condition(self, preset, depth):
        """Test shipped profiles satisfy the two-sided condition with their c_star."""
        profile = profile_preset(preset)
        generated = generate_hset_tree(profile, depth)
        assert verify_hset_condition(generated.tree, profile).passed

    def test_log_profile_grows_slowly(self):
        """Test theta = 0 populations grow sub-exponentially."""
        counts = generate_hset_tree(profile_preset("log"), 12).tree.level_counts()
        assert counts[-1] < 2**6
        assert np.all(np.diff(counts) >= 0)

    def test_chain_fails_binary_profile(self):
        """Test a chain cannot follow exponential branching."""
        report = verify_hset_condition(RootedTree.chain(5), profile_preset("binary"))
        assert not report.passed
        assert report.min_ratio == pytest.approx(2.0**-4)

    def test_self_consistency(self):
        """Test any tree passes at its measured bound."""
        tree = RootedTree.full(3, 3)
        profile = profile_preset("binary")
        measured = verify_hset_condition(tree, profile)
        bound = max(measured.max_ratio, 1 / measured.min_ratio)
        assert verify_hset_condition(tree, profile, c_star=bound).passed

    def test_sampled_verification(self):
        """Test sampling is used above the sample size and is seeded."""
        tree = generate_hset_tree(profile_preset("binary"), 8).tree
        a = verify_hset_condition(tree, profile_preset("binary"), sample=50, seed=1)
        b = verify_hset_condition(tree, profile_preset("binary"), sample=50, seed=1)
        assert not a.exhaustive
        assert a.pairs_checked == 50
        assert a == b

    def test_depth_guard(self):
        """Test depth above the guard is refused."""
        with pytest.raises(ScaleException):
            generate_hset_tree(profile_preset("binary"), 31)

    def test_vertex_guard(self):
        """Test the predicted vertex count guard."""
        with pytest.raises(InfeasibleProfileException):
            generate_hset_tree(profile_preset("binary"), 8, settings=Settings(max_tree_vertices=100))

    def test_decreasing_profile_infeasible(self):
        """Test a gauge that decreases toward zero cannot be grown."""
        with pytest.raises(InfeasibleProfileException):
            level_targets(HSetProfile(theta=0.0, gamma=1.0), 6)


class TestSerialization:
    """Test the line-oriented text formats."""

    def test_tree_lines(self):
        """Test the id parent level layout."""
        assert dump_tree(RootedTree.chain(3)) == "0 -1 0\n1 0 1\n2 1 2\n"

    def test_tree_reload(self, binary_tree):
        """Test a dumped tree loads back unchanged."""
        loaded = load_tree(dump_tree(binary_tree))
        assert np.array_equal(loaded.parent, binary_tree.parent)
        assert np.array_equal(loaded.level, binary_tree.level)

    def test_inconsistent_levels(self):
        """Test stated levels must agree with the parents."""
        with pytest.raises(ValidationException):
            load_tree("0 -1 0\n1 0 2\n")

    def test_malformed_line(self):
        """Test a short line is named in the error."""
        with pytest.raises(ValidationException):
            load_tree("0 -1 0\n1 0\n")

    def test_partition_reload(self, chain16):
        """Test partitions survive a dump and load."""
        partition = TreePartition.from_labels(chain16, [0] * 8 + [8] * 8)
        loaded = load_partition(dump_partition(partition), chain16)
        assert loaded.parts == partition.parts

    def test_operator_reload(self):
        """Test levelwise weights keep full precision."""
        tree = RootedTree.full(2, 2)
        u = [1.0, 1 / 3, 0.1]
        w = [2.0, 0.7, 1e-5]
        loaded_tree, lu, lw = load_operator(dump_operator(tree, u, w))
        assert loaded_tree.size == 7
        assert lu.tolist() == u
        assert lw.tolist() == w

    @hyp_settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=80))
    def test_random_tree_reload(self, seed, V):
        """Test random trees reload to the same parent array."""
        tree = random_tree(seed, V, 3)
        assert np.array_equal(load_tree(dump_tree(tree)).parent, tree.parent)
