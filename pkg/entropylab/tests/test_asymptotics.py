"""Tests for closed-form envelopes, growth inversion and slope fitting."""

import math

import numpy as np
import pytest

from entropylab.app.core.exceptions import (
    ConvergenceException,
    DegenerateGridException,
    DomainException,
    UnsupportedRegimeException,
    ValidationException,
)
from entropylab.app.services.asymptotics import growth as growth_module
from entropylab.app.services.asymptotics import (
    EnvelopeParams,
    LogPowerProfile,
    RateSeries,
    envelope,
    invert_growth,
    slope_fit,
    slowly_varying_check,
    sobolev_envelope,
    tree_envelope,
)


def _tree(**kwargs) -> EnvelopeParams:
    return EnvelopeParams(side="tree", **kwargs)


def _sobolev(**kwargs) -> EnvelopeParams:
    return EnvelopeParams(side="sobolev", **kwargs)


class TestTreeEnvelope:
    """Test the tree-side orders for theta > 0."""

    def test_case_one(self):
        """Test p = q with kappa = theta gives n^-1 (log n)^-alpha."""
        result = tree_envelope(_tree(theta=1.0, kappa_w=1.0, alpha_u=1.0), 2**10)
        assert result.case_id == "1"
        assert result.power == pytest.approx(-1.0)
        assert result.log_power == pytest.approx(-1.0)
        assert result.value == pytest.approx(2.0**-10 / 10.0)

    def test_critical_p_geq_q(self):
        """Test kappa on the critical line with p = q gives (log n)^-alpha_0."""
        params = _tree(theta=1.0, kappa_u=-1.0, kappa_w=1.0, alpha_u=1.0)
        result = tree_envelope(params, 2**10)
        assert result.case_id == "2a"
        assert result.value == pytest.approx(0.1)

    def test_critical_p_lt_q_power(self):
        """Test alpha_0 below 1/p - 1/q gives n^-alpha_0."""
        params = _tree(theta=1.0, kappa_u=-1.0, kappa_w=1.0, alpha_u=0.25, p=1, q=2)
        result = tree_envelope(params, 2**8)
        assert result.case_id == "2b-power"
        assert result.value == pytest.approx(0.25)

    def test_critical_p_lt_q_log(self):
        """Test alpha_0 above 1/p - 1/q gives n^(1/q-1/p) (log n)^(-alpha_0+1/p-1/q)."""
        params = _tree(theta=1.0, kappa_u=-1.0, kappa_w=1.0, alpha_u=1.0, p=1, q=2)
        result = tree_envelope(params, 2**16)
        assert result.case_id == "2b-log"
        assert result.value == pytest.approx(2.0**-10)

    def test_excluded_edge(self):
        """Test alpha_0 = 1/p - 1/q is refused."""
        params = _tree(theta=1.0, kappa_u=-1.0, kappa_w=1.0, alpha_u=0.5, p=1, q=2)
        with pytest.raises(UnsupportedRegimeException):
            tree_envelope(params, 2**8)

    def test_subcritical(self):
        """Test kappa below the critical line is refused."""
        with pytest.raises(UnsupportedRegimeException):
            tree_envelope(_tree(theta=1.0, kappa_u=-2.0, kappa_w=1.0), 2**8)

    def test_weight_condition(self):
        """Test kappa_w below theta / q is refused."""
        with pytest.raises(UnsupportedRegimeException):
            tree_envelope(_tree(theta=1.0, kappa_u=1.0, kappa_w=0.2), 2**8)

    def test_small_n(self):
        """Test n = 3 lies outside the domain."""
        with pytest.raises(DomainException):
            tree_envelope(_tree(theta=1.0, kappa_w=1.0), 3)

    def test_wrong_side(self):
        """Test Sobolev parameters are refused."""
        with pytest.raises(UnsupportedRegimeException):
            tree_envelope(_sobolev(theta=0.5), 2**8)

    def test_boundary_continuity(self):
        """Test case 1 just above the critical line stays within a factor 4 of case 2a."""
        n = 2**10
        base = dict(theta=1.0, kappa_w=1.0, alpha_u=1.0)
        above = tree_envelope(_tree(kappa_u=-1.0 + 1e-6, **base), n)
        on = tree_envelope(_tree(kappa_u=-1.0, **base), n)
        assert above.case_id == "1"
        assert on.case_id == "2a"
        assert 0.25 <= above.value / on.value <= 4.0

    @pytest.mark.parametrize(
        "params",
        [
            dict(theta=1.0, kappa_w=1.0, alpha_u=1.0),
            dict(theta=2.0, kappa_w=1.5, kappa_u=1.0, gamma=1.0, p=1, q=2),
            dict(theta=1.0, kappa_w=0.5, alpha_w=2.0, kappa_u=0.5, p=2, q=2),
        ],
    )
    def test_slope_recovery(self, params):
        """Test fitted slopes match the exponents the envelope reports."""
        p = _tree(**params)
        expected = tree_envelope(p, 16)
        fit = slope_fit(RateSeries.dyadic(lambda n: tree_envelope(p, n).value, 4, 24))
        assert fit.power == pytest.approx(expected.power, abs=0.05)
        assert fit.log_power == pytest.approx(expected.log_power, abs=0.5)


class TestTreeEnvelopeThetaZero:
    """Test the tree-side orders for theta = 0."""

    def test_case_one(self):
        """Test alpha = 1 - gamma with p = q gives n^-1."""
        params = _tree(theta=0.0, kappa_u=-1.0, kappa_w=1.0, alpha_u=1.0)
        result = tree_envelope(params, 2**10)
        assert result.theorem == "tree-theta=0"
        assert result.case_id == "1"
        assert result.value == pytest.approx(2.0**-10)

    def test_critical_p_geq_q(self):
        """Test alpha = 0 with p = q gives (log n)^-lambda."""
        params = _tree(theta=0.0, kappa_u=-1.0, kappa_w=1.0, lambda_u=2.0)
        result = tree_envelope(params, 2**10)
        assert result.case_id == "2a"
        assert result.value == pytest.approx(0.01)

    def test_critical_p_lt_q_power(self):
        """Test lambda below 1/p - 1/q gives n^-lambda."""
        params = _tree(theta=0.0, kappa_u=-1.0, kappa_w=1.0, lambda_u=0.25, p=1, q=2)
        result = tree_envelope(params, 2**8)
        assert result.case_id == "2b-power"
        assert result.value == pytest.approx(0.25)

    def test_lambda_edge(self):
        """Test lambda = 1/p - 1/q is refused."""
        params = _tree(theta=0.0, kappa_u=-1.0, kappa_w=1.0, lambda_u=0.5, p=1, q=2)
        with pytest.raises(UnsupportedRegimeException):
            tree_envelope(params, 2**8)

    def test_needs_zero_kappa(self):
        """Test theta = 0 with kappa != 0 is refused."""
        with pytest.raises(UnsupportedRegimeException):
            tree_envelope(_tree(theta=0.0, kappa_w=1.0, alpha_u=1.0), 2**8)


class TestSobolevEnvelope:
    """Test weighted Sobolev embedding orders."""

    def test_point_boundary_strict(self):
        """Test theta = 0 with beta < delta gives n^(-r/d)."""
        params = _sobolev(theta=0.0, r=1.0, d=1)
        for n in (4, 2**10, 2**20):
            result = sobolev_envelope(params, n)
            assert result.case_id == "1"
            assert result.value == pytest.approx(1.0 / n)

    def test_singleton(self):
        """Test the singleton flag discards theta, gamma and nu."""
        params = _sobolev(theta=0.7, gamma=2.0, nu=1.0, r=2.0, d=2, singleton=True)
        result = sobolev_envelope(params, 2**10)
        assert result.theorem == "sobolev-theta=0-strict"
        assert result.power == pytest.approx(-1.0)

    def test_smooth_branch(self):
        """Test delta/d below (delta - beta)/theta gives n^(-delta/d + 1/q - 1/p)."""
        result = sobolev_envelope(_sobolev(theta=0.5, r=1.0, d=1), 2**10)
        assert result.case_id == "1-smooth"
        assert result.value == pytest.approx(2.0**-10)

    def test_weight_branch(self):
        """Test a heavy weight makes (delta - beta)/theta the rate."""
        result = sobolev_envelope(_sobolev(theta=0.5, r=1.0, d=1, beta_g=0.8), 2**10)
        assert result.case_id == "1-weight"
        assert result.power == pytest.approx(-0.4)
        assert result.value == pytest.approx(2.0**-4)

    def test_balanced_excluded(self):
        """Test delta/d = (delta - beta)/theta is refused."""
        with pytest.raises(UnsupportedRegimeException):
            sobolev_envelope(_sobolev(theta=0.5, r=1.0, d=1, beta_g=0.5), 2**10)

    def test_negative_delta(self):
        """Test delta <= 0 is refused."""
        with pytest.raises(UnsupportedRegimeException):
            sobolev_envelope(_sobolev(theta=0.5, r=0.5, d=2, p=1, q="inf"), 2**10)

    def test_critical_log_branch(self):
        """Test lambda above 1/p - 1/q gives n^(1/q-1/p) (log n)^(-lambda+1/p-1/q)."""
        params = _sobolev(theta=0.0, r=1.0, d=1, p=1, q=2, beta_g=0.5, lambda_g=1.0)
        result = sobolev_envelope(params, 2**16)
        assert result.theorem == "sobolev-theta=0-critical"
        assert result.case_id == "2b-log"
        assert result.value == pytest.approx(2.0**-10)

    def test_theta_zero_gamma_one_refused(self):
        """Test gamma = 1 on the point-boundary critical line is refused, not divided by."""
        params = _sobolev(theta=0.0, gamma=1.0, r=1.0, d=1, beta_g=1.0, alpha_g=1.0)
        with pytest.raises(UnsupportedRegimeException) as exc:
            sobolev_envelope(params, 2**10)
        assert exc.value.regime == "sobolev-theta0-gamma"

    def test_theta_not_below_d(self):
        """Test theta >= d is refused."""
        with pytest.raises(UnsupportedRegimeException):
            sobolev_envelope(_sobolev(theta=1.0, r=1.0, d=1), 2**10)

    def test_dispatch(self):
        """Test envelope routes on the side."""
        tree = _tree(theta=1.0, kappa_w=1.0)
        sobolev = _sobolev(theta=0.0, r=1.0, d=1)
        assert envelope(tree, 64) == tree_envelope(tree, 64)
        assert envelope(sobolev, 64) == sobolev_envelope(sobolev, 64)

    def test_bad_dimension(self):
        """Test d = 0 is refused at construction."""
        with pytest.raises(ValidationException):
            _sobolev(d=0)


class TestInvertGrowth:
    """Test solving y^gamma psi(y) = x."""

    def test_identity(self):
        """Test gamma = 1 with psi = 1 returns x."""
        assert invert_growth(1.0, LogPowerProfile(), 7.0).y == pytest.approx(7.0, rel=1e-12)

    def test_square_root(self):
        """Test gamma = 2 with psi = 1 takes square roots."""
        assert invert_growth(2.0, LogPowerProfile(), 16.0).y == pytest.approx(4.0, rel=1e-12)

    def test_log_factor(self):
        """Test psi = log2 y recovers y = 2^10 with a small residual."""
        solution = invert_growth(1.0, LogPowerProfile(log_power=1.0), 2.0**10 * 10.0)
        assert solution.y == pytest.approx(2.0**10, rel=1e-9)
        assert solution.residual <= 1e-10
        assert 0.5 <= solution.asymptotic_ratio <= 2.0

    @pytest.mark.parametrize("x", [2.0**20, 2.0**30, 2.0**40])
    def test_closed_form_agreement(self, x):
        """Test large x agrees with the closed form within a factor 2."""
        solution = invert_growth(2.0, LogPowerProfile(log_power=1.0), x)
        assert solution.residual <= 1e-10
        assert 0.5 <= solution.asymptotic_ratio <= 2.0

    def test_below_increasing_branch(self):
        """Test x under the turning point of y (log2 y)^-3 is refused."""
        with pytest.raises(DomainException):
            invert_growth(1.0, LogPowerProfile(log_power=-3.0), 0.1)

    def test_gamma_positive(self):
        """Test gamma = 0 is refused."""
        with pytest.raises(ValidationException):
            invert_growth(0.0, LogPowerProfile(), 2.0)

    def test_unconverged_root_raises(self, monkeypatch):
        """Test a root left off target raises instead of returning an uncertified y."""
        monkeypatch.setattr(growth_module, "brentq", lambda f, a, b, **kwargs: a)
        monkeypatch.setattr(growth_module, "_NEWTON_STEPS", 0)
        with pytest.raises(ConvergenceException) as exc:
            invert_growth(1.0, LogPowerProfile(), 7.0)
        assert exc.value.error_code == "NOT_CONVERGED"
        assert exc.value.residual > exc.value.tolerance


class TestSlowlyVarying:
    """Test the slowly-varying band check."""

    def test_constant(self):
        """Test a constant passes with C = 1."""
        report = slowly_varying_check(lambda y: 1.0, 0.1)
        assert report.passed
        assert report.constant == 1.0

    def test_logarithm(self):
        """Test log2 y passes with a finite constant."""
        report = slowly_varying_check(math.log2, 0.1)
        assert report.passed
        assert 1.0 < report.constant < 10.0

    def test_linear_fails(self):
        """Test y itself is not slowly varying."""
        assert not slowly_varying_check(lambda y: y, 0.1).passed

    def test_epsilon_positive(self):
        """Test epsilon = 0 is refused."""
        with pytest.raises(ValidationException):
            slowly_varying_check(math.log2, 0.0)


class TestSlopeFit:
    """Test least-squares rate fitting."""

    def test_pure_power(self):
        """Test n^-2 gives power -2 and no log term."""
        fit = slope_fit(RateSeries.dyadic(lambda n: n**-2.0, 4, 20))
        assert fit.power == pytest.approx(-2.0, abs=1e-9)
        assert fit.log_power == pytest.approx(0.0, abs=1e-9)

    def test_power_and_log(self):
        """Test n^-1 (log2 n)^-3 on 2^6 to 2^20."""
        fit = slope_fit(RateSeries.dyadic(lambda n: n**-1.0 * math.log2(n) ** -3.0, 6, 20))
        assert fit.power == pytest.approx(-1.0, abs=0.02)
        assert fit.log_power == pytest.approx(-3.0, abs=0.3)

    def test_constant(self):
        """Test a constant series has zero slopes."""
        fit = slope_fit(RateSeries.dyadic(lambda n: 5.0, 2, 12))
        assert fit.power == pytest.approx(0.0, abs=1e-9)
        assert fit.log_power == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize(
        "grid",
        [[4, 8, 16, 32, 64], [2, 3, 4, 5, 6, 7], [1, 2, 4, 8, 16, 32]],
    )
    def test_degenerate_grids(self, grid):
        """Test too few points, a narrow span and n < 2 are refused."""
        with pytest.raises(DegenerateGridException):
            slope_fit(RateSeries(np.array(grid, dtype=float), np.ones(len(grid))))


class TestRateSeries:
    """Test rate series validation and CSV exchange."""

    def test_csv_header_and_reload(self, tmp_path):
        """Test the n,value header and full-precision reload from a file."""
        series = RateSeries.dyadic(lambda n: 1.0 / 3.0 / n, 2, 8)
        path = tmp_path / "rates.csv"
        text = series.to_csv(path)
        assert text.splitlines()[0] == "n,value"
        loaded = RateSeries.from_csv(path)
        assert np.array_equal(loaded.values, series.values)
        assert np.array_equal(RateSeries.from_csv(text).n, series.n)

    def test_wrong_header(self):
        """Test a CSV without the n,value header is refused."""
        with pytest.raises(ValidationException):
            RateSeries.from_csv("k,e\n1,2\n2,3\n")

    def test_not_increasing(self):
        """Test repeated n values are refused."""
        with pytest.raises(ValidationException):
            RateSeries([2.0, 2.0], [1.0, 1.0])

    def test_nonpositive_values(self):
        """Test zero values are refused."""
        with pytest.raises(ValidationException):
            RateSeries([2.0, 4.0], [1.0, 0.0])
