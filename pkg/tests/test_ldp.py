import math
from fractions import Fraction

import numpy as np
import pytest

from sexratio import PBoysMore, simulate_batch
from sexratio.errors import DomainError, ParameterError
from sexratio.ldp import (enumerated_prob_sum_le, eta, eta_circle_second_difference, eta_derivative,
                          eta_second_difference,
                          exact_prob_sum_le, log_prob_sum_le, rate_fit, rho, saddle_z)


def test_rho_one_one():
    assert abs(rho(1, 1.0) - 27 / 32) < 1e-15


@pytest.mark.parametrize("p", [1, 2, 3])
def test_rho_in_unit_interval(p):
    for c in np.round(np.arange(0.1, 10.01, 0.1), 10):
        assert 0 < rho(p, c) < 1


def test_rho_increases_to_one():
    vals = [rho(1, c) for c in (10.0, 100.0, 1000.0)]
    assert vals[0] < vals[1] < vals[2] < 1
    assert 1 - vals[2] < 1e-3


def test_saddle_point():
    z = saddle_z(1, 1.0)
    assert abs(z - 8 / 9) < 1e-15
    assert abs(eta_derivative(1, 1.0, z)) < 1e-8
    assert abs(math.exp(-eta(1, 1.0, z)) - rho(1, 1.0)) < 1e-12


@pytest.mark.parametrize("p,c", [(1, 0.3), (2, 1.0), (3, 4.0), (1, 10.0)])
def test_saddle_point_grid(p, c):
    z = saddle_z(p, c)
    assert 0 < z < 1
    # step scaled to the gap below 1; curvature grows like (1 - z)^-2
    h = 1e-4 * (1 - z)
    assert abs(eta_derivative(p, c, z, h)) < 1e-7
    assert abs(math.exp(-eta(p, c, z)) - rho(p, c)) < 1e-12
    # a saddle: peak along the real axis, valley along the circle |z| = z_hat
    assert eta_second_difference(p, c, z, 10 * h) < 0
    assert eta_circle_second_difference(p, c, z, 10 * h) > 0


def test_eta_domain():
    with pytest.raises(DomainError):
        eta(1, 1.0, 1.0)
    with pytest.raises(DomainError):
        eta(1, 1.0, 1j)


def test_eta_complex_agrees_on_real_axis():
    assert abs(eta(2, 1.5, complex(0.6)) - eta(2, 1.5, 0.6)) < 1e-15


def test_single_family_cases():
    assert exact_prob_sum_le(1, 0.5, 1, exact=True) == Fraction(1, 2)
    assert exact_prob_sum_le(1, 1.0, 1, exact=True) == Fraction(5, 8)
    assert abs(exact_prob_sum_le(1, 1.0, 1) - 5 / 8) < 1e-15


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_dp_matches_enumeration(c):
    for n in (1, 2, 3):
        assert exact_prob_sum_le(1, c, n, exact=True) == enumerated_prob_sum_le(1, c, n)


def test_float_dp_matches_fraction():
    for n in (5, 17, 40):
        a = exact_prob_sum_le(2, 1.5, n)
        b = exact_prob_sum_le(2, 1.5, n, exact=True)
        assert math.isclose(a, float(b), rel_tol=1e-12)


def test_deep_probabilities_do_not_underflow():
    lp = log_prob_sum_le(1, 1.0, 2048)
    assert math.isfinite(lp)
    assert -2048 * 0.1699 - 30 < lp < -2048 * 0.1699 + 5


def test_monte_carlo_at_eight_families():
    n, reps = 8, 10**6
    # past 17 children a family already has 9 girls, so the cap cannot matter
    b = simulate_batch(PBoysMore(1), n * reps, 2718, cap=17, engine="walk")
    girls = np.where(b.censored, np.inf, b.girls).reshape(reps, n).sum(axis=1)
    freq = float((girls <= 8).mean())
    p = exact_prob_sum_le(1, 1.0, n)
    se = math.sqrt(p * (1 - p) / reps)
    assert abs(freq - p) < 3 * se


def test_rate_fit_grid():
    fit = rate_fit(1, 1.0, [64, 128, 256, 512])
    target = math.log(32 / 27)
    assert fit.target_rate == pytest.approx(target)
    # plain slope is biased by the log n correction; with that column it is close
    assert abs(fit.rate_with_log - target) / target < 0.005
    gaps = [r - target for r in fit.rates]
    assert all(g > 0 for g in gaps) and all(a > b for a, b in zip(gaps, gaps[1:]))
    probs = [lp for _, lp in fit.exact_probs]
    assert all(a > b for a, b in zip(probs, probs[1:]))
    assert len(fit.residuals) == 4


def test_slope_stable_when_dropping_smallest_n():
    a = rate_fit(1, 1.0, [64, 128, 256, 512]).fitted_rate
    b = rate_fit(1, 1.0, [128, 256, 512]).fitted_rate
    assert abs(a - b) / a < 0.005


def test_large_c_degenerate():
    fit = rate_fit(1, 1000.0, [2, 4, 8])
    assert all(math.exp(lp) > 0.9 for _, lp in fit.exact_probs)
    assert abs(fit.fitted_rate) < 0.02


def test_rate_fit_as_dict():
    d = rate_fit(2, 1.0, [8, 16]).as_dict()
    assert set(d) >= {"p", "c", "rho", "z_hat", "exact_probs", "fitted_rate", "target_rate"}


@pytest.mark.parametrize("call", [lambda: rho(0, 1.0), lambda: rho(1, -1.0),
                                  lambda: log_prob_sum_le(1, 1.0, 0), lambda: rate_fit(1, 1.0, [8])])
def test_bad_arguments(call):
    with pytest.raises(ParameterError):
        call()
