"""Tests for exponents, l_p norms and unit-ball nets."""

import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from entropylab.app.config import Settings
from entropylab.app.core.exceptions import ScaleException, ValidationException
from entropylab.app.services.spaces import (
    INF,
    Exponent,
    Vector,
    dual_exponent,
    norm,
    sample_unit_ball,
    unit_ball_net,
)

coords = st.lists(
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False).filter(
        lambda x: x == 0 or abs(x) > 1e-6
    ),
    min_size=1,
    max_size=6,
)
exponents = st.sampled_from([1.0, 1.5, 2.0, 3.0, 7.0, "inf"])


class TestExponent:
    """Test exponent parsing and duality."""

    def test_infinity_is_exact(self):
        """Test 1/inf is exactly zero whatever spelling is used."""
        for value in ("inf", "Infinity", "∞", math.inf):
            p = Exponent.of(value)
            assert p.is_infinite
            assert p.reciprocal == 0.0
            assert str(p) == "inf"

    def test_rejects_below_one(self):
        """Test exponents below 1 are rejected."""
        with pytest.raises(ValidationException):
            Exponent.of(0.5)
        with pytest.raises(ValidationException):
            Exponent.of("abc")

    @pytest.mark.parametrize(
        "p, expected",
        [(2.0, 2.0), (1.0, math.inf), (4.0, 4.0 / 3.0), ("inf", 1.0)],
    )
    def test_dual(self, p, expected):
        """Test the conjugate exponent with the 1' = inf, inf' = 1 conventions."""
        assert dual_exponent(p).order == pytest.approx(expected)

    @given(exponents)
    def test_dual_reciprocals_sum_to_one(self, p):
        """Test 1/p + 1/p' = 1."""
        e = Exponent.of(p)
        assert e.reciprocal + e.dual().reciprocal == pytest.approx(1.0)

    def test_ordering(self):
        """Test comparisons treat inf as the largest exponent."""
        assert Exponent.of(1) < Exponent.of(2) < INF
        assert INF >= Exponent.of(1e9)
        assert Exponent.of(2).to_json() == 2.0
        assert INF.to_json() == "inf"


class TestNorm:
    """Test l_p norms of vectors."""

    @pytest.mark.parametrize(
        "v, p, expected",
        [([3, 4], 2, 5.0), ([1, -1, 1], "inf", 1.0), ([1, 1, 1], 1, 3.0)],
    )
    def test_examples(self, v, p, expected):
        """Test textbook norm values."""
        assert norm(v, p) == pytest.approx(expected, rel=1e-15)

    def test_empty_vector_rejected(self):
        """Test an empty vector cannot be constructed."""
        with pytest.raises(ValidationException):
            Vector([])

    def test_zero_vector(self):
        """Test the zero vector has norm zero."""
        assert norm([0.0, 0.0], 3) == 0.0

    @given(coords, exponents, st.sampled_from([-50.0, -2.5, -1.0, 0.0, 1e-3, 0.5, 3.0, 1e4]))
    def test_homogeneity(self, v, p, lam):
        """Test norm(lam v) = |lam| norm(v)."""
        scaled = norm(np.asarray(v) * lam, p)
        assert scaled == pytest.approx(abs(lam) * norm(v, p), rel=1e-12, abs=1e-300)

    @given(coords)
    def test_monotone_in_exponent(self, v):
        """Test norm(v, q) <= norm(v, p) for p <= q."""
        values = [norm(v, p) for p in (1.0, 1.5, 2.0, 3.0, "inf")]
        for smaller_p, larger_p in zip(values, values[1:]):
            assert larger_p <= smaller_p * (1 + 1e-12) + 1e-300

    @given(coords)
    def test_holder_bound(self, v):
        """Test norm(v, p) <= dim^(1/p - 1/q) norm(v, q) for p <= q."""
        dim = len(v)
        for p, q in [(1.0, 2.0), (2.0, "inf"), (1.0, "inf")]:
            gap = Exponent.of(p).reciprocal - Exponent.of(q).reciprocal
            assert norm(v, p) <= dim**gap * norm(v, q) * (1 + 1e-12) + 1e-300


class TestUnitBallNet:
    """Test deterministic ball nets."""

    def test_one_dimensional_grid(self):
        """Test the 1-D sup-ball net contains the half-step grid."""
        net = unit_ball_net(1, "inf", 0.5)
        values = set(np.round(net.points[:, 0], 12))
        assert {-1.0, -0.5, 0.0, 0.5, 1.0} <= values

    def test_square_grid_size(self):
        """Test the 2-D sup-ball net at mesh 0.25 has at least 81 points."""
        net = unit_ball_net(2, "inf", 0.25)
        assert net.size >= 81
        assert net.dim == 2

    def test_points_inside_ball(self):
        """Test every net point has l_1 norm at most 1 + 1e-12."""
        net = unit_ball_net(2, 1, 0.5)
        assert np.all(np.abs(net.points).sum(axis=1) <= 1 + 1e-12)

    @pytest.mark.parametrize("dim, p, mesh", [(2, 1, 0.3), (2, 2, 0.2), (3, "inf", 0.4), (3, 1.5, 0.5)])
    def test_covering_radius(self, dim, p, mesh, rng):
        """Test random ball points lie within mesh of the net."""
        net = unit_ball_net(dim, p, mesh)
        samples = sample_unit_ball(dim, p, 1000, rng)
        assert np.all(net.distance_to(samples) <= mesh + 1e-12)

    def test_deterministic(self):
        """Test two builds give identical points."""
        a = unit_ball_net(3, 2, 0.3)
        b = unit_ball_net(3, 2, 0.3)
        assert np.array_equal(a.points, b.points)

    def test_dimension_guard(self):
        """Test dimension five is refused."""
        with pytest.raises(ScaleException):
            unit_ball_net(5, 2, 0.5)

    def test_size_guard(self):
        """Test the net-size guard triggers before enumeration."""
        tight = Settings(oracle_max_net_points=100)
        with pytest.raises(ScaleException):
            unit_ball_net(2, "inf", 0.05, settings=tight)

    def test_mesh_range(self):
        """Test meshes outside (0, 1] are rejected."""
        with pytest.raises(ValidationException):
            unit_ball_net(2, 2, 0.0)

    @hyp_settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=1, max_value=3), exponents)
    def test_all_points_in_ball(self, dim, p):
        """Test ball membership for random dims and exponents."""
        net = unit_ball_net(dim, p, 0.5)
        values = np.array([norm(row, p) for row in net.points])
        assert np.all(values <= 1 + 1e-12)
