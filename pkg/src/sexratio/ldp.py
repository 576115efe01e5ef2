"""Large deviations of the girls total under the p-boys-more rule.

``P(X_1 + ... + X_n <= c n)`` decays like ``rho(p, c)^n``; ``rho`` comes from the
saddle point ``z_hat`` of ``eta(z) = -p log f(z) + c log z``.  Exact
probabilities come from convolving the truncated pmf ``n`` times.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, ParameterError
from .exact import enumerate_paths_oracle, log_mass_p_boys_more, pmf_girls_p_boys_more, pgf_f
from .strategies import PBoysMore


def _check(p, c):
    if isinstance(p, bool) or int(p) != p or p < 1:
        raise ParameterError(f"p must be a positive integer, got {p!r}")
    if not (c > 0 and math.isfinite(c)):
        raise ParameterError(f"c must be a positive real, got {c!r}")


def log_rho(p: int, c: float) -> float:
    _check(p, c)
    return (p * math.log((p + 2 * c) / (2 * (p + c)))
            + c * (2 * math.log(p + 2 * c) - math.log(4 * c) - math.log(p + c)))


def rho(p: int, c: float) -> float:
    return math.exp(log_rho(p, c))


def saddle_z(p: int, c: float) -> float:
    _check(p, c)
    return 4 * c * (p + c) / (p + 2 * c) ** 2


def eta(p: int, c: float, z):
    """``-p log f(z) + c log z``; real on (0, 1), complex (principal logs) inside the disc."""
    if isinstance(z, complex):
        if not (0 < abs(z) < 1):
            raise DomainError(f"eta needs 0 < |z| < 1, got {z}")
        return -p * cmath.log(pgf_f(z)) + c * cmath.log(z)
    if not 0 < z < 1:
        raise DomainError(f"eta needs 0 < z < 1, got {z}")
    return -p * math.log(pgf_f(z).real) + c * math.log(z)


def eta_derivative(p: int, c: float, z: float, h: float = 1e-6) -> float:
    return (eta(p, c, z + h) - eta(p, c, z - h)) / (2 * h)


def eta_second_difference(p: int, c: float, z: float, h: float = 1e-4) -> float:
    """Along the real axis; negative at the saddle, where ``eta`` peaks on (0, 1)."""
    return (eta(p, c, z + h) - 2 * eta(p, c, z) + eta(p, c, z - h)) / (h * h)


def eta_circle_second_difference(p: int, c: float, z: float, h: float = 1e-4) -> float:
    """Second difference of ``Re eta(z e^(i theta))`` in ``theta`` at 0; positive at the saddle."""
    def re(th):
        return eta(p, c, complex(z * cmath.exp(1j * th))).real
    return (re(h) - 2 * re(0.0) + re(-h)) / (h * h)


# ------------------------------------------------------------ exact

def _conv_scaled(a, b, top):
    # (vec, log scale) pairs; vectors kept with max 1 so nothing underflows
    v = np.convolve(a[0], b[0])[:top + 1]
    m = v.max()
    return v / m, a[1] + b[1] + math.log(m)


def log_prob_sum_le(p: int, c: float, n: int) -> float:
    """``log P(sum of n girls counts <= floor(c n))`` by repeated squaring of the pmf."""
    _check(p, c)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    top = math.floor(c * n)
    # girls beyond the threshold can only push the sum above it
    base = np.exp(log_mass_p_boys_more(p, np.arange(top + 1)))
    cur = (base / base.max(), math.log(base.max()))
    acc = None
    k = n
    while k:
        if k & 1:
            acc = cur if acc is None else _conv_scaled(acc, cur, top)
        k >>= 1
        if k:
            cur = _conv_scaled(cur, cur, top)
    return acc[1] + math.log(math.fsum(acc[0]))


def exact_prob_sum_le(p: int, c: float, n: int, exact: bool = False):
    """``P(X_1 + ... + X_n <= floor(c n))``; ``exact=True`` gives a Fraction (small n only)."""
    if not exact:
        return math.exp(log_prob_sum_le(p, c, n))
    _check(p, c)
    top = math.floor(c * n)
    base = pmf_girls_p_boys_more(p, top, exact=True).masses
    dist = [Fraction(1)] + [Fraction(0)] * top
    for _ in range(n):
        new = [Fraction(0)] * (top + 1)
        for i, di in enumerate(dist):
            if di:
                for j in range(top + 1 - i):
                    new[i + j] += di * base[j]
        dist = new
    return sum(dist, Fraction(0))


def enumerated_prob_sum_le(p: int, c: float, n: int) -> Fraction:
    """Same event from brute-force paths: n families in a row reach surplus ``p n``
    with at most ``floor(c n)`` girls, within ``2 floor(c n) + p n`` children."""
    top = math.floor(c * n)
    paths = enumerate_paths_oracle(PBoysMore(p * n), 2 * top + p * n)
    return sum((m for (_, g), m in paths.masses.items() if g <= top), Fraction(0))


# ------------------------------------------------------------- fits

@dataclass(frozen=True)
class LdpResult:
    p: int
    c: float
    rho: float
    z_hat: float
    exact_probs: list
    fitted_rate: float
    rate_with_log: float
    rates: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    @property
    def target_rate(self) -> float:
        return -math.log(self.rho)

    def as_dict(self):
        return {"p": self.p, "c": self.c, "rho": self.rho, "z_hat": self.z_hat,
                "target_rate": self.target_rate, "fitted_rate": self.fitted_rate,
                "rate_with_log": self.rate_with_log,
                "exact_probs": [[n, lp] for n, lp in self.exact_probs],
                "rates": self.rates, "residuals": self.residuals}


def rate_fit(p: int, c: float, n_grid) -> LdpResult:
    """Least-squares slope of ``-log P_n`` on ``n``; also refit with a ``log n`` column."""
    ns = np.asarray(sorted(n_grid), dtype=float)
    if ns.size < 2:
        raise ParameterError("need at least two grid points")
    logp = np.array([log_prob_sum_le(p, c, int(n)) for n in ns])
    y = -logp
    X = np.column_stack([ns, np.ones_like(ns)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    slope_log = float("nan")
    if ns.size >= 3:
        X2 = np.column_stack([ns, np.log(ns), np.ones_like(ns)])
        slope_log = float(np.linalg.lstsq(X2, y, rcond=None)[0][0])
    return LdpResult(p, c, rho(p, c), saddle_z(p, c),
                     [(int(n), float(lp)) for n, lp in zip(ns, logp)],
                     float(coef[0]), slope_log, (y / ns).tolist(), resid.tolist())
