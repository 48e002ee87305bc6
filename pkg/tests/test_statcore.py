"""Stat-core primitives against independent numerical oracles."""

import math

import numpy as np
import pytest

from cftrial.errors import DomainError, InvalidInputError
from cftrial.statcore import (
    ArmSummary,
    LogIncidenceEstimate,
    derive_stream,
    estimate_log_incidence,
    normal_cdf,
    normal_quantile,
    poisson_draw,
)


def simpson_normal_cdf(x: float, n: int = 20_001) -> float:
    """Brute-force oracle: Simpson integration of the normal density from
    -12 to x (the mass below -12 is ~2e-33)."""
    lo = -12.0
    h = (x - lo) / (n - 1)
    grid = [lo + i * h for i in range(n)]
    f = [math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi) for t in grid]
    weights = [1.0] + [4.0 if i % 2 else 2.0 for i in range(1, n - 1)] + [1.0]
    return h / 3.0 * sum(w * v for w, v in zip(weights, f))


def bisect_quantile(p: float) -> float:
    """Oracle: bisection of normal_cdf."""
    lo, hi = -10.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestNormalCdf:
    def test_symmetry_at_zero(self):
        assert normal_cdf(0.0) == 0.5

    def test_standard_quantile_identity(self):
        assert normal_cdf(-1.959964) == pytest.approx(0.025, abs=1e-6)

    def test_against_simpson_oracle(self):
        # 1.0452 arises when back-substituting the conservative design.
        assert simpson_normal_cdf(1.0452) == pytest.approx(0.8520, abs=1e-3)
        assert normal_cdf(1.0452) == pytest.approx(simpson_normal_cdf(1.0452), abs=1e-9)

    @pytest.mark.parametrize("x", [-8.0, -3.3, -0.7, 0.2, 1.5, 4.4, 7.0])
    def test_agrees_with_oracle_across_range(self, x):
        assert normal_cdf(x) == pytest.approx(simpson_normal_cdf(x), abs=1e-10)

    def test_tail_values_positive_and_tiny(self):
        assert 0.0 < normal_cdf(-10.0) < 1e-20
        assert normal_cdf(10.0) == pytest.approx(1.0, abs=1e-20)


class TestNormalQuantile:
    def test_median(self):
        assert normal_quantile(0.5) == pytest.approx(0.0, abs=1e-12)

    def test_sign_convention_is_lower_tail(self):
        # The 0.025 quantile is negative.
        assert normal_quantile(0.025) == pytest.approx(-1.959964, abs=1e-5)

    def test_against_bisection_oracle(self):
        assert bisect_quantile(0.8) == pytest.approx(0.841621, abs=1e-5)
        assert normal_quantile(0.8) == pytest.approx(bisect_quantile(0.8), abs=1e-9)

    @pytest.mark.parametrize("p", [1e-10, 1e-4, 0.025, 0.31, 0.5, 0.77, 0.975, 1 - 1e-6])
    def test_round_trip_through_cdf(self, p):
        assert normal_cdf(normal_quantile(p)) == pytest.approx(p, abs=1e-9)

    def test_quantile_of_cdf_is_identity(self):
        for x in np.linspace(-6.0, 6.0, 121):
            assert normal_quantile(normal_cdf(float(x))) == pytest.approx(float(x), abs=1e-8)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.7])
    def test_domain_error_outside_unit_interval(self, p):
        with pytest.raises(DomainError):
            normal_quantile(p)


class TestEstimateLogIncidence:
    def test_moderate_counts(self):
        est = estimate_log_incidence(ArmSummary(events=90, person_years=1805.0))
        assert est.log_rate == pytest.approx(math.log(90 / 1805), abs=1e-12)
        assert est.log_rate == pytest.approx(-2.9985, abs=1e-4)
        assert est.std_err == pytest.approx(1 / math.sqrt(90), abs=1e-12)

    def test_single_event_single_year(self):
        est = estimate_log_incidence(ArmSummary(events=1, person_years=1.0))
        assert est.log_rate == 0.0
        assert est.std_err == 1.0

    def test_zero_count_correction(self):
        est = estimate_log_incidence(ArmSummary(events=0, person_years=100.0))
        assert est.log_rate == pytest.approx(math.log(0.005), abs=1e-12)
        assert est.std_err == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_py_scaling_shifts_log_rate(self):
        base = estimate_log_incidence(ArmSummary(events=17, person_years=100.0))
        scaled = estimate_log_incidence(ArmSummary(events=17, person_years=300.0))
        assert scaled.log_rate == pytest.approx(base.log_rate - math.log(3.0), abs=1e-12)
        assert scaled.std_err == base.std_err

    def test_same_rate_same_log_rate(self):
        a = estimate_log_incidence(ArmSummary(events=20, person_years=500.0))
        b = estimate_log_incidence(ArmSummary(events=40, person_years=1000.0))
        assert b.log_rate == pytest.approx(a.log_rate, abs=1e-12)
        assert b.std_err < a.std_err

    def test_invariants_enforced(self):
        with pytest.raises(InvalidInputError):
            ArmSummary(events=-1, person_years=10.0)
        with pytest.raises(InvalidInputError):
            ArmSummary(events=3, person_years=0.0)
        with pytest.raises(InvalidInputError):
            LogIncidenceEstimate(log_rate=float("nan"), std_err=1.0)
        with pytest.raises(InvalidInputError):
            LogIncidenceEstimate(log_rate=0.0, std_err=0.0)


class TestPoissonDraw:
    def test_reproducible_and_mean(self):
        # 54.15 expected events in 1,805 PYs at 0.03 cases/PY.
        rng1 = derive_stream(42, 1)
        rng2 = derive_stream(42, 1)
        draws1 = [poisson_draw(54.15, rng1) for _ in range(1000)]
        draws2 = [poisson_draw(54.15, rng2) for _ in range(1000)]
        assert draws1 == draws2
        big = derive_stream(42, 2).poisson(54.15, 100_000)
        assert big.mean() == pytest.approx(54.15, abs=0.1)

    def test_variance_property(self):
        # 41.4 expected events in 1,805 PYs at 0.023 cases/PY.
        draws = derive_stream(7, 0).poisson(41.4, 100_000)
        assert draws.var() == pytest.approx(41.4, abs=1.0)

    @pytest.mark.parametrize("mean", [1.0, 10.0, 100.0])
    def test_mean_and_variance_within_three_se(self, mean):
        n = 100_000
        draws = derive_stream(123, int(mean)).poisson(mean, n)
        se_mean = math.sqrt(mean / n)
        assert abs(draws.mean() - mean) <= 3 * se_mean
        se_var = mean * math.sqrt(2.0 / n)  # var of the sample variance, Poisson approx
        assert abs(draws.var() - mean) <= 4 * se_var

    def test_tiny_mean_is_almost_surely_zero(self):
        draws = derive_stream(5, 9).poisson(1e-9, 10_000)
        assert draws.sum() == 0

    def test_mean_must_be_positive(self):
        with pytest.raises(DomainError):
            poisson_draw(0.0, derive_stream(1))


class TestStreamSplitting:
    def test_identical_paths_identical_streams(self):
        a = derive_stream(99, 3, 1).random(256)
        b = derive_stream(99, 3, 1).random(256)
        assert np.array_equal(a, b)

    def test_distinct_paths_are_independent_streams(self):
        a = derive_stream(99, 3, 1).random(256)
        b = derive_stream(99, 3, 2).random(256)
        c = derive_stream(98, 3, 1).random(256)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_order_independence(self):
        # Drawing stream 5 never depends on whether stream 4 was drawn.
        first = derive_stream(11, 5).random(64)
        _ = derive_stream(11, 4).random(1024)
        again = derive_stream(11, 5).random(64)
        assert np.array_equal(first, again)
