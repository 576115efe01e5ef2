"""Tail exponent of the square-root hitting time.

``P(tau > k) ~ alpha k^(-kappa)`` with ``kappa = -lambda0/2`` where
``lambda0`` is the root of ``lambda -> D_{-lambda}(-c)`` in (-1, 0) closest to
zero.  ``D`` is built from two Kummer series; in double precision for
``|z| <= 3`` and with mpmath at raised precision beyond, where the two terms
cancel heavily.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.optimize import brentq
from scipy.special import rgamma

from .errors import DomainError, ParameterError, QualityError, SolverError
from .strategies import SqrtBoundary
from .walk import simulate_batch

NU_MAX = 4.0
Z_MAX = 50.0
Z_DOUBLE = 3.0  # double-precision series error stays below 5e-14 up to here
SCAN_STEP = 1e-3


def kummer_m(a: float, b: float, x: float) -> tuple[float, float]:
    """``M(a, b, x)`` for ``x >= 0`` by compensated summation; returns ``(value, tail_bound)``."""
    terms = [1.0]
    t = 1.0
    n = 0
    while True:
        ratio = (a + n) / ((b + n) * (n + 1)) * x
        t *= ratio
        n += 1
        terms.append(t)
        if n > x and n > abs(a) + 1:
            r = abs((a + n) / ((b + n) * (n + 1)) * x)
            if r < 1 and abs(t) * r / (1 - r) < 1e-17 * max(1.0, abs(math.fsum(terms))):
                return math.fsum(terms), abs(t) * r / (1 - r)
        if n > 10000:
            raise SolverError("Kummer series did not converge")


def _pcf_double(nu, z):
    x = 0.5 * z * z
    m1, _ = kummer_m(-0.5 * nu, 0.5, x)
    m2, _ = kummer_m(0.5 - 0.5 * nu, 1.5, x)
    pre = 2.0 ** (0.5 * nu) * math.exp(-0.25 * z * z)
    return pre * (math.sqrt(math.pi) * rgamma(0.5 - 0.5 * nu) * m1
                  - math.sqrt(2 * math.pi) * z * rgamma(-0.5 * nu) * m2)


def _pcf_mp(nu, z):
    # same decomposition; the extra digits absorb the cancellation (~z^2/4 / ln 10 digits)
    dps = 30 + int(0.25 * z * z / math.log(10)) + 10
    with mpmath.workdps(dps):
        nu = mpmath.mpf(nu)
        z = mpmath.mpf(z)
        x = z * z / 2
        # zeroprec: the series is a polynomial with exact zeros at integer orders
        zp = 4 * mpmath.mp.prec
        m1 = mpmath.hyp1f1(-nu / 2, mpmath.mpf(1) / 2, x, zeroprec=zp)
        m2 = mpmath.hyp1f1((1 - nu) / 2, mpmath.mpf(3) / 2, x, zeroprec=zp)
        pre = mpmath.power(2, nu / 2) * mpmath.exp(-z * z / 4)
        val = pre * (mpmath.sqrt(mpmath.pi) * mpmath.rgamma((1 - nu) / 2) * m1
                     - mpmath.sqrt(2 * mpmath.pi) * z * mpmath.rgamma(-nu / 2) * m2)
        return float(val)


def parabolic_cylinder_D(nu: float, z: float) -> float:
    """Weber's ``D_nu(z)`` for real ``|nu| <= 4`` and ``|z| <= 50``."""
    if not (abs(nu) <= NU_MAX and abs(z) <= Z_MAX):
        raise DomainError(f"D_nu(z) implemented for |nu|<={NU_MAX}, |z|<={Z_MAX}; got ({nu}, {z})")
    if abs(z) <= Z_DOUBLE:
        return _pcf_double(float(nu), float(z))
    return _pcf_mp(float(nu), float(z))


@dataclass(frozen=True)
class KappaResult:
    c: float
    lambda0: float
    kappa: float
    residual: float
    bracket_width: float

    def as_dict(self):
        return {"c": self.c, "lambda0": self.lambda0, "kappa": self.kappa,
                "residual": self.residual, "bracket_width": self.bracket_width}


def _denominator(lam, c):
    return parabolic_cylinder_D(-lam, -c)


def lambda0(c: float, xtol: float = 1e-14) -> KappaResult:
    """Largest root of ``D_{-lambda}(-c)`` in (-1, 0), found by a downward scan then Brent."""
    if not (c > 0 and math.isfinite(c)):
        raise ParameterError(f"c must be a positive real, got {c!r}")
    grid = np.linspace(0.0, -1.0, int(round(1 / SCAN_STEP)) + 1)
    prev = _denominator(grid[0], c)
    samples = [(0.0, prev)]
    for lo in grid[1:]:
        val = _denominator(lo, c)
        samples.append((float(lo), val))
        if val == 0.0 or np.sign(val) != np.sign(prev):
            hi = lo + SCAN_STEP
            break
        prev = val
    else:
        raise SolverError(f"no sign change of D_(-lambda)(-{c}) on (-1, 0)", samples=samples)
    # the transform's numerator must not vanish on the bracket
    pre = math.exp(-c * c / 4) * parabolic_cylinder_D(-lo, 0.0)
    if not pre > 0:
        raise SolverError("numerator vanishes on the bracket", samples=samples)
    root, info = brentq(_denominator, lo, hi, args=(c,), xtol=xtol, rtol=4 * np.finfo(float).eps,
                        full_output=True)
    if not info.converged:
        raise SolverError("Brent iteration failed", samples=samples)
    res = abs(_denominator(root, c))
    return KappaResult(float(c), float(root), -0.5 * float(root), res, float(hi - lo))


def kappa(c: float) -> float:
    return lambda0(c).kappa


def kappa_grid(cs) -> list[KappaResult]:
    return [lambda0(float(c)) for c in cs]


# ------------------------------------------------------- Monte Carlo

@dataclass(frozen=True)
class TailFit:
    c: float
    kappa_hat: float
    ci: tuple[float, float]
    alpha_hat: float
    families: int
    censored: int
    ks: np.ndarray
    survival: np.ndarray

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci[1] - self.ci[0])


def survival_curve(tau: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Empirical ``P(tau > k)``; censored families count as survivors."""
    st = np.sort(tau)
    return 1.0 - np.searchsorted(st, ks, side="right") / st.size


def _fit(tau_sorted, logk, ks):
    n = tau_sorted.size
    surv = 1.0 - np.searchsorted(tau_sorted, ks, side="right") / n
    slope, icpt = np.polyfit(logk, np.log(surv), 1)
    return -slope, math.exp(icpt)


def tail_exponent_mc(c: float, families: int = 10**5, cap=10**6, kmin=1e3, kmax=1e5,
                     points: int = 21, boot: int = 200, seed: int = 0,
                     engine: str = "auto", min_tail: int = 100) -> TailFit:
    """Least-squares slope of log survival on log k over ``[kmin, kmax]`` with a bootstrap CI."""
    if families < 1 or cap < kmax:
        raise ParameterError("need families >= 1 and cap >= kmax")
    batch = simulate_batch(SqrtBoundary(c), families, seed, cap=cap, engine=engine)
    tau = batch.tau
    if (tau > kmax).sum() < min_tail:
        raise QualityError(f"only {(tau > kmax).sum()} families exceed k={kmax:g}",
                           partial=batch)
    ks = np.geomspace(kmin, kmax, points)
    logk = np.log(ks)
    k_hat, a_hat = _fit(np.sort(tau), logk, ks)
    rng = np.random.default_rng(seed)
    reps = np.empty(boot)
    for b in range(boot):
        reps[b] = _fit(np.sort(rng.choice(tau, tau.size)), logk, ks)[0]
    lo, hi = np.quantile(reps, [0.025, 0.975])
    return TailFit(float(c), float(k_hat), (float(lo), float(hi)), a_hat, families,
                   batch.n_censored, ks, survival_curve(tau, ks))
