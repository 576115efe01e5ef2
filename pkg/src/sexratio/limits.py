"""Ratio statistics over families and checks of their limit laws."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats
from scipy.optimize import brentq
from scipy.special import erf, erfc

from .errors import DomainError, ParameterError, QualityError
from .exact import pgf_f_at_exp
from .strategies import PBoysMore, SqrtBoundary
from .walk import FamilyBatch, simulate_batch

LIMIT_CAP = 1e30
SQRT_CAP = 1e40
MAX_CENSORED = 1e-3


@dataclass(frozen=True)
class RatioSeries:
    """Running ``R_n``, ``F_n``, ``barR_n``, ``barF_n`` over the uncensored families.

    Prefixes with no boys yet hold NaN.
    """

    R: np.ndarray
    F: np.ndarray
    barR: np.ndarray
    barF: np.ndarray
    excluded: int = 0

    def __len__(self):
        return self.R.shape[0]

    def at(self, n: int) -> dict:
        i = n - 1
        return {"n": n, "R": float(self.R[i]), "F": float(self.F[i]),
                "barR": float(self.barR[i]), "barF": float(self.barF[i])}


def ratio_series(batch: FamilyBatch) -> RatioSeries:
    keep = ~batch.censored
    if not keep.any():
        raise QualityError("every family is censored", partial=batch)
    x = batch.girls[keep]
    y = batch.boys[keep]
    sx = np.cumsum(x)
    sy = np.cumsum(y)
    n = np.arange(1, x.size + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        R = np.where(sy > 0, sx / sy, np.nan)
        F = np.where(sy > 0, sx / (sx + sy), np.nan)
        # averaged ratios need every family to have a boy
        per_r = np.where(y > 0, x / np.where(y > 0, y, 1), np.nan)
        barR = np.cumsum(per_r) / n
        barF = np.cumsum(x / np.maximum(x + y, 1)) / n
    return RatioSeries(R, F, barR, barF, int((~keep).sum()))


def one_minus_r(batch: FamilyBatch, ns=None) -> np.ndarray:
    """``1 - R_n = sum S / sum Y`` without the cancellation of ``1 - X/Y``."""
    keep = ~batch.censored
    s = np.cumsum(batch.surplus[keep])
    y = np.cumsum(batch.boys[keep])
    out = s / y
    return out if ns is None else out[np.asarray(ns) - 1]


@dataclass(frozen=True)
class GofResult:
    D: float
    n: int
    pvalue: float

    def as_dict(self):
        return {"D": self.D, "n": self.n, "pvalue": self.pvalue}


def ks_test(samples, cdf) -> GofResult:
    r = stats.kstest(np.asarray(samples), cdf)
    return GofResult(float(r.statistic), len(samples), float(r.pvalue))


def ks_2sample(a, b) -> GofResult:
    r = stats.ks_2samp(np.asarray(a), np.asarray(b))
    return GofResult(float(r.statistic), min(len(a), len(b)), float(r.pvalue))


# -------------------------------------------------------- stable law

def _check_pos(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("stable law evaluated at x <= 0")
    return x


def stable_density(p: float, x):
    """Density of half the Brownian first-passage time to level ``p``."""
    x = _check_pos(x)
    return p / (2 * np.sqrt(np.pi * x**3)) * np.exp(-p * p / (4 * x))


def stable_cdf(p: float, x):
    x = _check_pos(x)
    return erfc(p / (2 * np.sqrt(x)))


def stable_normalization(p: float = 1.0) -> float:
    val, _ = integrate.quad(lambda x: stable_density(p, x), 0, np.inf, epsabs=1e-13, epsrel=1e-12,
                            limit=400)
    return val


def stable_laplace(p: float, s: float) -> float:
    f = lambda x: math.exp(-s * x) * float(stable_density(p, x))
    val, _ = integrate.quad(f, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


def chi2_1_cdf(x):
    x = np.asarray(x, dtype=float)
    return erf(np.sqrt(np.maximum(x, 0.0) / 2))


def chi2_1_quantile(q: float) -> float:
    """Inverse of the chi-squared(1) cdf by root finding."""
    if not 0 < q < 1:
        raise DomainError(f"quantile level must be in (0, 1), got {q}")
    hi = 1.0
    while float(chi2_1_cdf(hi)) < q:
        hi *= 2
    return brentq(lambda x: float(chi2_1_cdf(x)) - q, 0.0, hi, xtol=1e-15, rtol=1e-15)


# ------------------------------------------------- p boys more limits

def _families(spec, n, reps, seed, cap):
    batch = simulate_batch(spec, n * reps, seed, cap=cap, engine="auto")
    frac = batch.n_censored / (n * reps)
    if frac > MAX_CENSORED:
        raise QualityError(f"{frac:.2%} of families censored at cap {cap:g}", partial=batch)
    return batch


def chi2_limit_samples(p: int, n: int, reps: int, seed: int = 0, cap=LIMIT_CAP) -> np.ndarray:
    """``(1/2) n p (1 - R_n)`` for ``reps`` independent groups of ``n`` families."""
    if n < 1 or reps < 1:
        raise ParameterError("n and reps must be positive")
    b = _families(PBoysMore(p), n, reps, seed, cap)
    if b.n_censored:
        raise QualityError(f"{b.n_censored} censored families at cap {cap:g}", partial=b)
    y = b.boys.reshape(reps, n).sum(axis=1)
    s = b.surplus.reshape(reps, n).sum(axis=1)
    return 0.5 * n * p * s / y


def stable_sum_samples(p: int, n: int, reps: int, seed: int = 0, cap=LIMIT_CAP) -> np.ndarray:
    """``n^-2 * sum X`` over ``reps`` groups of ``n`` families under the p-boys-more rule."""
    b = _families(PBoysMore(p), n, reps, seed, cap)
    if b.n_censored:
        raise QualityError(f"{b.n_censored} censored families at cap {cap:g}", partial=b)
    return b.girls.reshape(reps, n).sum(axis=1) / float(n) ** 2


def laplace_limit_check(p: int, s: complex, n: int) -> float:
    """``|f(exp(-s/n^2))^(pn) - exp(-p sqrt(s))|``."""
    s = complex(s)
    if s.real < 0:
        raise DomainError("need Re s >= 0")
    lhs = pgf_f_at_exp(s, n) ** (p * n)
    rhs = np.exp(-p * np.sqrt(s))
    return float(abs(lhs - rhs))


# ------------------------------------------------------ square root

@dataclass(frozen=True)
class ScaledDeviation:
    c: float
    kappa: float
    n: int
    scaled: np.ndarray
    U: np.ndarray
    V: np.ndarray
    Z: np.ndarray
    ratio_stat: np.ndarray
    identity_gap: float
    censored: int
    sensitivity: dict = field(default_factory=dict)


def _scaled_parts(tau, surplus, c, kappa, n):
    a = n ** (-1.0 / (2 * kappa))
    T = tau.sum(axis=1)
    A = surplus.sum(axis=1)
    Q = np.sqrt(tau).sum(axis=1)
    Zs = (surplus - c * np.sqrt(tau)).sum(axis=1)
    dev = 2 * A / (T + A)
    return dev / a, a * a * T, a * Q, a * Zs, a


def sqrt_strategy_scaled_deviation(c: float, kappa: float, n: int, reps: int, seed: int = 0,
                                   cap=SQRT_CAP, first_id: int = 0) -> ScaledDeviation:
    """``n^(1/(2 kappa)) (1 - R_n)`` for ``reps`` groups of ``n`` square-root families."""
    if not 0 < kappa < 0.5:
        raise ParameterError(f"kappa must lie in (0, 1/2), got {kappa}")
    b = simulate_batch(SqrtBoundary(c), n * reps, seed, cap=cap, engine="leap", first_id=first_id)
    if b.n_censored > MAX_CENSORED * n * reps:
        raise QualityError(f"{b.n_censored} censored families at cap {cap:g}", partial=b)
    tau = b.tau.reshape(reps, n)
    sur = b.surplus.reshape(reps, n)
    scaled, U, V, Z, a = _scaled_parts(tau, sur, c, kappa, n)
    rebuilt = (2 * c * V + 2 * Z) / (U + c * a * V + a * Z)
    gap = float(np.max(np.abs(rebuilt - scaled) / np.abs(scaled)))
    sens = {}
    for dk in (-0.01, 0.01):
        sens[round(kappa + dk, 12)] = _scaled_parts(tau, sur, c, kappa + dk, n)[0]
    return ScaledDeviation(c, kappa, n, scaled, U, V, Z, 2 * c * V / U, gap, b.n_censored, sens)


def slutsky_gap(series: RatioSeries) -> np.ndarray:
    """``(1/2 - F_n) - (1/4)(1 - R_n)``, which should be o(1 - R_n)."""
    return (0.5 - series.F) - 0.25 * (1 - series.R)
