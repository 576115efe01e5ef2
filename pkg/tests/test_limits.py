import math

import numpy as np
import pytest

from sexratio import PBoys, PBoysMore, QualityError, SqrtBoundary, simulate_batch
from sexratio.errors import DomainError, ParameterError
from sexratio.kappa import kappa
from sexratio.limits import (chi2_1_cdf, chi2_1_quantile, chi2_limit_samples, ks_2sample, ks_test,
                             laplace_limit_check, one_minus_r, ratio_series, slutsky_gap,
                             sqrt_strategy_scaled_deviation, stable_cdf, stable_density,
                             stable_laplace, stable_normalization, stable_sum_samples)
from sexratio.walk import FamilyBatch


def _batch(girls, boys):
    g, b = np.asarray(girls, float), np.asarray(boys, float)
    return FamilyBatch(g + b, b - g, np.zeros(g.size, bool))


def test_two_family_example():
    s = ratio_series(_batch([1, 3], [1, 1]))
    assert s.R[1] == 2.0
    assert math.isclose(s.F[1], 2 / 3)
    assert s.at(2)["R"] == 2.0


def test_prefix_without_boys_is_nan():
    s = ratio_series(_batch([2, 1], [0, 1]))
    assert math.isnan(s.R[0]) and s.R[1] == 3.0
    assert math.isnan(s.barR[1])


def test_censored_families_excluded():
    b = FamilyBatch(np.array([2.0, 100.0, 4.0]), np.array([0.0, -100.0, 2.0]),
                    np.array([False, True, False]))
    s = ratio_series(b)
    assert len(s) == 2 and s.excluded == 1
    with pytest.raises(QualityError):
        ratio_series(b.select(np.array([1])))


def test_f_and_r_identity_on_prefixes():
    s = ratio_series(simulate_batch(PBoys(1), 10**5, 3))
    ok = ~np.isnan(s.R)
    assert np.max(np.abs(s.F[ok] - s.R[ok] / (1 + s.R[ok]))) < 1e-14


def test_one_more_r_below_one():
    b = simulate_batch(PBoysMore(1), 10**5, 4, cap=1e20)
    s = ratio_series(b)
    assert np.all(s.R < 1)
    assert np.allclose(one_minus_r(b), 1 - s.R, rtol=1e-6, atol=1e-12)


def test_first_boy_constant():
    s = ratio_series(simulate_batch(PBoys(1), 10**6, 5))
    assert abs(s.barF[-1] - (1 - math.log(2))) < 0.005


def test_one_more_constants():
    s = ratio_series(simulate_batch(PBoysMore(1), 10**6, 6, cap=1e30))
    assert abs(s.barR[-1] - (2 * math.log(2) - 1)) < 0.005
    assert abs(s.barF[-1] - (1 - math.pi / 4)) < 0.005


def test_one_more_favors_boys():
    b = simulate_batch(PBoysMore(1), 10**5, 7, cap=1e30)
    r = b.girls / b.boys
    se = r.std(ddof=1) / math.sqrt(r.size)
    assert r.mean() + 5 * se < 1


def test_slutsky_gap_small():
    b = simulate_batch(PBoys(2), 10**6, 8)
    s = ratio_series(b)
    gap = slutsky_gap(s)
    dev = np.abs(1 - s.R)
    # quadratic in 1 - R_n
    tail = slice(10**5, None)
    assert np.all(np.abs(gap[tail]) <= dev[tail] ** 2)


# ------------------------------------------------------ stable law

def test_stable_normalization():
    assert abs(stable_normalization(1.0) - 1) < 1e-8
    assert abs(stable_normalization(2.5) - 1) < 1e-8


@pytest.mark.parametrize("p,s", [(1.0, 1.0), (1.0, 0.5), (2.0, 3.0)])
def test_stable_laplace(p, s):
    assert abs(stable_laplace(p, s) - math.exp(-p * math.sqrt(s))) < 1e-6


def test_stable_cdf_chi2_relation():
    # p^2 / (2 X) is chi-squared(1) when X has the stable law
    p = 1.7
    for q in (0.05, 0.3, 0.5, 0.9):
        x = p * p / (2 * chi2_1_quantile(q))
        assert abs(stable_cdf(p, x) - (1 - q)) < 1e-12


def test_stable_cdf_matches_density():
    from scipy import integrate
    for x in (0.1, 1.0, 10.0):
        val, _ = integrate.quad(lambda v: float(stable_density(1.0, v)), 0, x, epsabs=1e-13)
        assert abs(val - stable_cdf(1.0, x)) < 1e-9


def test_stable_domain():
    with pytest.raises(DomainError):
        stable_density(1.0, 0.0)
    with pytest.raises(DomainError):
        stable_cdf(1.0, [-1.0, 1.0])


def test_chi2_quantile():
    assert abs(chi2_1_quantile(0.5) - 0.454936423119572) < 1e-12
    assert abs(float(chi2_1_cdf(chi2_1_quantile(0.99))) - 0.99) < 1e-14
    with pytest.raises(DomainError):
        chi2_1_quantile(1.0)


# --------------------------------------------------- limit samples

def test_chi2_limit():
    x = chi2_limit_samples(1, 500, 1000, seed=11)
    assert np.all(x > 0)
    assert ks_test(x, chi2_1_cdf).D < 0.08
    assert abs(np.median(x) - chi2_1_quantile(0.5)) < 0.05


def test_chi2_limit_rejects_small_args():
    with pytest.raises(ParameterError):
        chi2_limit_samples(1, 0, 10)


def test_stable_sums():
    x = stable_sum_samples(1, 500, 2000, seed=12)
    assert ks_test(x, lambda v: stable_cdf(1.0, v)).D < 0.06


def test_laplace_limit():
    assert laplace_limit_check(1, 0, 100) == 0.0
    gaps = [laplace_limit_check(1, 1.0, n) for n in (10**2, 10**3, 10**4)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3
    assert laplace_limit_check(1, 1 + 2j, 10**4) < 1e-3
    with pytest.raises(DomainError):
        laplace_limit_check(1, -1.0, 10)


def test_two_sample_ks_on_identical_draws():
    a = np.arange(100.0)
    g = ks_2sample(a, a)
    assert g.D == 0.0 and g.pvalue == 1.0
    assert set(g.as_dict()) == {"D", "n", "pvalue"}


# ---------------------------------------------------- square root

@pytest.fixture(scope="module")
def sqrt_dev():
    return sqrt_strategy_scaled_deviation(1.0, kappa(1.0), 200, 300, seed=13)


def test_sqrt_identity(sqrt_dev):
    assert sqrt_dev.identity_gap < 1e-12
    assert sqrt_dev.censored == 0
    assert np.all(sqrt_dev.scaled > 0)
    assert sqrt_dev.scaled.shape == sqrt_dev.U.shape == sqrt_dev.ratio_stat.shape == (300,)


def test_sqrt_z_component_small(sqrt_dev):
    n = sqrt_dev.n
    assert np.all(np.abs(sqrt_dev.Z) <= n ** (-1 / (2 * sqrt_dev.kappa)) * n)
    big = sqrt_strategy_scaled_deviation(1.0, kappa(1.0), 800, 300, seed=13, first_id=10**6)
    assert np.median(np.abs(big.Z)) < np.median(np.abs(sqrt_dev.Z))


def test_sqrt_sensitivity_emitted(sqrt_dev):
    assert len(sqrt_dev.sensitivity) == 2
    for k, v in sqrt_dev.sensitivity.items():
        assert abs(k - sqrt_dev.kappa) == pytest.approx(0.01)
        assert v.shape == sqrt_dev.scaled.shape


def test_sqrt_censoring_quality_error():
    with pytest.raises(QualityError) as info:
        sqrt_strategy_scaled_deviation(1.0, kappa(1.0), 100, 50, seed=1, cap=10**4)
    assert info.value.partial is not None


def test_sqrt_rejects_bad_kappa():
    with pytest.raises(ParameterError):
        sqrt_strategy_scaled_deviation(1.0, 0.7, 10, 10)
