"""numba kernels: stopping predicates, the bit walker and the leap sampler.

Walk state is held in float64 (``k``, ``S``, ``X``); values are exact
integers below 2**53 and the leap engine is the only path that goes further.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from .rng import PURPOSE_LEAP, PURPOSE_STEPS, new_state, next_uniform, next_word
from .strategies import (FORM_PLAIN, K_CHILDREN, K_DOUBLING, K_GIRLS, K_PBOYS,
                         K_PBOYSMORE, K_SQRT)

LN_SQRT_2PI = 0.9189385332046727
LN2 = math.log(2.0)
BIT_WINDOW = 4096.0
POPCOUNT_MAX = 1024.0
SF_EXACT_MAX = 4096.0
EXACT_INT = 2.0**53

_U1 = np.uint64(1)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@numba.njit(cache=True, inline="always")
def popcount(w):
    w = w - ((w >> _U1) & _M1)
    w = (w & _M2) + ((w >> np.uint64(2)) & _M2)
    w = (w + (w >> np.uint64(4))) & _M4
    return np.int64((w * _H01) >> np.uint64(56))


# ---------------------------------------------------------------- rules

@numba.njit(cache=True)
def bound_h(x, c, form):
    if form == FORM_PLAIN:
        return c * math.sqrt(x)
    if x < 3.0:
        return 0.0
    return c * math.sqrt(x * math.log(math.log(x)))


@numba.njit(cache=True)
def stops(kind, p, c, form, k, s, x):
    if kind == K_PBOYS:
        return k + s == 2.0 * p
    if kind == K_PBOYSMORE:
        return s == p
    if kind == K_SQRT:
        return s >= c * math.sqrt(k)
    if kind == K_GIRLS:
        return s >= bound_h(x, c, form)
    if kind == K_CHILDREN:
        return s >= bound_h(k, c, form)
    return 3.0 * s >= k


@numba.njit(cache=True)
def level(kind, p, c, form, k):
    """Smallest integer surplus that stops a level-type rule at time ``k``."""
    if kind == K_PBOYSMORE:
        return p
    if kind == K_SQRT:
        return np.ceil(c * math.sqrt(k))
    if kind == K_CHILDREN:
        return np.ceil(bound_h(k, c, form))
    return np.ceil(k / 3.0)


@numba.njit(cache=True)
def _can_skip(kind, p, c, form, k, s, x):
    # no stop is possible in the next 64 steps
    if kind == K_PBOYS:
        return 0.5 * (k + s) + 64.0 < p
    if kind == K_GIRLS:
        return s + 64.0 < np.ceil(bound_h(x, c, form))
    return s + 64.0 < level(kind, p, c, form, k + 1.0)


@numba.njit(cache=True)
def advance(st, kind, p, c, form, k, s, x, nsteps):
    """Walk up to ``nsteps`` single steps from fresh words of ``st``.

    Returns ``(k, s, x, stopped)``; stops at the first step satisfying the rule.
    """
    done = 0.0
    while done < nsteps:
        w = next_word(st)
        rem = min(64.0, nsteps - done)
        if rem == 64.0 and _can_skip(kind, p, c, form, k, s, x):
            pc = popcount(w)
            s += 2.0 * pc - 64.0
            x += 64.0 - pc
            k += 64.0
            done += 64.0
            continue
        for j in range(int(rem)):
            if (w >> np.uint64(j)) & _U1:
                s += 1.0
            else:
                s -= 1.0
                x += 1.0
            k += 1.0
            if stops(kind, p, c, form, k, s, x):
                return k, s, x, True
        done += rem
    return k, s, x, False


@numba.njit(cache=True, nogil=True)
def walk_batch(seed, first_id, kind, p, c, form, cap, tau, surplus, censored):
    """Step-exact families ``first_id .. first_id+len(tau)-1``."""
    for i in range(tau.shape[0]):
        st = new_state(seed, np.uint64(first_id + i), np.uint64(PURPOSE_STEPS))
        k, s, x, hit = advance(st, kind, p, c, form, 0.0, 0.0, 0.0, cap)
        tau[i] = k
        surplus[i] = s
        censored[i] = not hit


# ------------------------------------------------- symmetric binomial

@numba.njit(cache=True)
def stirlerr(n):
    """``log(n!) - log(sqrt(2 pi n) (n/e)^n)``."""
    if n <= 15.0:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - LN_SQRT_2PI
    s0 = 1.0 / 12
    s1 = 1.0 / 360
    s2 = 1.0 / 1260
    s3 = 1.0 / 1680
    s4 = 1.0 / 1188
    nn = n * n
    if n > 500.0:
        return (s0 - s1 / nn) / n
    if n > 80.0:
        return (s0 - (s1 - s2 / nn) / nn) / n
    if n > 35.0:
        return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n


@numba.njit(cache=True)
def bd0(d, m):
    """``(m+d) log(1+d/m) - d`` without cancellation."""
    x = m + d
    if abs(d) < 0.1 * (x + m):
        v = d / (x + m)
        s = d * v
        ej = 2.0 * x * v
        v2 = v * v
        for j in range(1, 1000):
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
        return s
    return x * math.log1p(d / m) - d


@numba.njit(cache=True)
def logpmf_d(t, d):
    """``log P(Bin(t, 1/2) = t/2 + d)``.

    Taking the offset ``d`` rather than the count keeps full precision when
    ``t`` is far beyond 2**53.
    """
    h = 0.5 * t
    if abs(d) > h:
        return -np.inf
    if abs(d) == h:
        return -t * LN2
    lo = h - d
    hi = h + d
    lc = stirlerr(t) - stirlerr(hi) - stirlerr(lo) - bd0(d, h) - bd0(-d, h)
    return lc + 0.5 * (math.log(t) - math.log(hi) - math.log(lo)) - LN_SQRT_2PI


@numba.njit(cache=True)
def logpmf_b(t, j):
    """``log P(Bin(t, 1/2) = j)``."""
    if j < 0.0 or j > t:
        return -np.inf
    return logpmf_d(t, j - 0.5 * t)


@numba.njit(cache=True)
def logpmf_s(t, x):
    """``log P(S_t = x)`` for the simple walk; ``-inf`` off the lattice."""
    if t <= EXACT_INT and (t + x) % 2.0 != 0.0:
        return -np.inf
    return logpmf_d(t, 0.5 * x)


@numba.njit(cache=True)
def _upper_sum(t, j):
    # P(B >= j) with j >= t/2 by direct summation
    term = math.exp(logpmf_b(t, j))
    tot = 0.0
    while j <= t and term > 0.0:
        tot += term
        if term < 1e-18 * tot:
            break
        term *= (t - j) / (j + 1.0)
        j += 1.0
    return tot


@numba.njit(cache=True)
def _norm_sf(w):
    return 0.5 * math.erfc(w / math.sqrt(2.0))


@numba.njit(cache=True)
def _lr_sf(t, d):
    # Lugannani-Rice for P(B >= t/2 + d + 1/2), i.e. d already continuity corrected
    h = 0.5 * t
    r = d / h
    if r == 0.0:
        return 0.5
    if r >= 1.0:
        return 0.0
    if r <= -1.0:
        return 1.0
    st = math.sqrt(t)
    klt = bd0(d, h) + bd0(-d, h)
    w = math.sqrt(2.0 * max(klt, 0.0))
    if d < 0.0:
        w = -w
    u = r * st
    if abs(r) < 1e-3:
        corr = r / (12.0 * st)
    else:
        corr = 1.0 / u - 1.0 / w
    phi = math.exp(-0.5 * w * w) / math.sqrt(2.0 * math.pi)
    val = _norm_sf(w) + phi * corr
    return min(1.0, max(0.0, val))


@numba.njit(cache=True)
def sf_b(t, j):
    """``P(Bin(t, 1/2) >= j)``: direct sums for small ``t``, saddle point beyond."""
    j = np.ceil(j)
    if j <= 0.0:
        return 1.0
    if j > t:
        return 0.0
    if t <= SF_EXACT_MAX:
        if j >= 0.5 * t:
            return _upper_sum(t, j)
        return 1.0 - _upper_sum(t, t - j + 1.0)
    return _lr_sf(t, j - 0.5 - 0.5 * t)


@numba.njit(cache=True)
def sf_s(t, x):
    """``P(S_t >= x)``."""
    if t <= EXACT_INT:
        return sf_b(t, np.ceil(0.5 * (t + x)))
    # lattice parity is below float resolution here
    return _lr_sf(t, 0.5 * x - 0.5)


@numba.njit(cache=True)
def hit_cdf(t, a):
    """``P(max_{i<=t} S_i >= a)`` for ``a >= 1`` (reflection principle)."""
    return sf_s(t, a) + sf_s(t, a + 1.0)


@numba.njit(cache=True)
def sample_s(st, m):
    """Draw ``S_m`` (a sum of ``m`` fair +-1 steps)."""
    if m <= POPCOUNT_MAX:
        n = int(m)
        b = 0
        while n >= 64:
            b += popcount(next_word(st))
            n -= 64
        if n > 0:
            mask = (_U1 << np.uint64(n)) - _U1
            b += popcount(next_word(st) & mask)
        return 2.0 * b - m
    # ratio of uniforms on the offset of B = (m + S)/2 from m/2; cells
    # [j, j+1) in count units, mode cell at offset 0 (even m) or 1/2 (odd m)
    half = 0.0 if (m > EXACT_INT or (m % 2.0) == 0.0) else 0.5
    lmode = logpmf_d(m, half)
    scale = 0.43 * math.sqrt(m + 1.0) + 2.0
    h = 0.5 * m
    while True:
        u = next_uniform(st)
        v = 2.0 * next_uniform(st) - 1.0
        off = np.floor(scale * v / u) + half
        if abs(off) > h:
            continue
        if 2.0 * math.log(u) <= logpmf_d(m, off) - lmode:
            return 2.0 * off


@numba.njit(cache=True)
def _invert_hit(a, target, m):
    # smallest t = a + 2i <= m with hit_cdf(t, a) >= target
    lo = 0.0
    hi = np.floor((m - a) / 2.0)
    while lo < hi:
        mid = np.floor(0.5 * (lo + hi))
        if mid <= lo or mid >= hi:
            # adjacent floats: resolution exhausted (only beyond 2**53)
            if mid < hi and hit_cdf(a + 2.0 * lo, a) >= target:
                return a + 2.0 * lo
            break
        if hit_cdf(a + 2.0 * mid, a) >= target:
            hi = mid
        else:
            lo = mid + 1.0
    return a + 2.0 * hi


@numba.njit(cache=True)
def _no_hit_end(st, a, m):
    # endpoint of an m-step walk conditioned on staying below a
    while True:
        b = sample_s(st, m)
        if b >= a:
            continue
        r = math.exp(logpmf_s(m, 2.0 * a - b) - logpmf_s(m, b))
        if next_uniform(st) >= r:
            return b


@numba.njit(cache=True)
def leap_family(seed, sid, kind, p, c, form, cap):
    """One family under a level-type rule; returns ``(tau, S, stopped)``."""
    st = new_state(seed, sid, np.uint64(PURPOSE_LEAP))
    k = 0.0
    s = 0.0
    while k < cap:
        a = level(kind, p, c, form, k + 1.0) - s
        room = cap - k
        if a <= 0.0:
            # before any step (a level of 0 or less at k=1), or rounding
            # once k exceeds 2**53
            if k >= EXACT_INT:
                return k + 1.0, s, True
            win = min(BIT_WINDOW, room)
        else:
            win = min(a * a, k + 1.0) if a < 1e8 else k + 1.0
            # any window length gives the same law; above 2**53 single steps
            # are below float resolution so windows must stay wide
            win = min(max(win, BIT_WINDOW, np.floor(k * 1e-12)), room)
        if win <= BIT_WINDOW:
            x = 0.5 * (k - s)
            k, s, x, hit = advance(st, kind, p, c, form, k, s, x, win)
            if hit:
                return k, s, True
            continue
        u0 = next_uniform(st)
        if a <= win and u0 < hit_cdf(win, a):
            t = _invert_hit(a, u0, win)
            k += t
            s += a
            if s >= level(kind, p, c, form, k):
                return k, s, True
        else:
            s += _no_hit_end(st, a, win)
            k += win
    return cap, s, False


@numba.njit(cache=True, nogil=True)
def leap_batch(seed, first_id, kind, p, c, form, cap, tau, surplus, censored):
    for i in range(tau.shape[0]):
        k, s, hit = leap_family(seed, np.uint64(first_id + i), kind, p, c, form, cap)
        tau[i] = k
        surplus[i] = s
        censored[i] = not hit
