"""Counter-based random streams (Philox4x64-10).

Every family owns a stream keyed by ``(master_seed, stream_id)``.  Block ``i``
of a stream is ``philox(counter=(i, purpose, 0, 0), key=(master_seed, stream_id))``,
so any word can be recomputed without touching the others.  Purpose 0 is the
raw coin-flip stream (bit ``j`` of word ``i`` is child ``64*i + j + 1``; a set
bit is a boy), purpose 1 feeds the leap sampler.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

MASK64 = (1 << 64) - 1

PURPOSE_STEPS = 0
PURPOSE_LEAP = 1

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)

# state layout used by the kernels
ST_KEY0, ST_KEY1, ST_PURPOSE, ST_BLOCK, ST_POS = 0, 1, 2, 3, 4
ST_BUF = 5
STATE_SIZE = 9


@numba.njit(inline="always")
def _mulhilo(a, b):
    a_lo = a & _LO32
    a_hi = a >> _S32
    b_lo = b & _LO32
    b_hi = b >> _S32
    ll = a_lo * b_lo
    hl = a_hi * b_lo
    lh = a_lo * b_hi
    hh = a_hi * b_hi
    cross = (ll >> _S32) + (hl & _LO32) + lh
    hi = hh + (hl >> _S32) + (cross >> _S32)
    return hi, a * b


@numba.njit(cache=True)
def philox4x64(c0, c1, c2, c3, k0, k1, out):
    """Ten Philox rounds on the 256-bit counter; writes four words to ``out``."""
    for _ in range(10):
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


@numba.njit(cache=True)
def new_state(master_seed, stream_id, purpose):
    st = np.zeros(STATE_SIZE, dtype=np.uint64)
    st[ST_KEY0] = master_seed
    st[ST_KEY1] = stream_id
    st[ST_PURPOSE] = purpose
    st[ST_POS] = np.uint64(4)
    return st


@numba.njit(cache=True)
def next_word(st):
    pos = st[ST_POS]
    if pos >= np.uint64(4):
        philox4x64(st[ST_BLOCK], st[ST_PURPOSE], _ZERO, _ZERO,
                   st[ST_KEY0], st[ST_KEY1], st[ST_BUF:ST_BUF + 4])
        st[ST_BLOCK] += _ONE
        pos = _ZERO
    st[ST_POS] = pos + _ONE
    return st[ST_BUF + np.int64(pos)]


@numba.njit(cache=True)
def next_uniform(st):
    """Uniform double in the open interval (0, 1)."""
    return (np.float64(next_word(st) >> _S11) + 0.5) * 1.1102230246251565e-16


@numba.njit(cache=True)
def _fill_words(master_seed, stream_id, purpose, start, count, out):
    buf = np.empty(4, dtype=np.uint64)
    for i in range(count):
        w = start + i
        philox4x64(np.uint64(w // 4), purpose, _ZERO, _ZERO, master_seed, stream_id, buf)
        out[i] = buf[w % 4]


def _u64(x: int) -> np.uint64:
    if not 0 <= x <= MASK64:
        raise ValueError(f"{x} does not fit in 64 unsigned bits")
    return np.uint64(x)


@dataclass(frozen=True)
class RngStream:
    """Reproducible stream of fair coin flips for one family."""

    master_seed: int
    stream_id: int

    def __post_init__(self):
        _u64(self.master_seed)
        _u64(self.stream_id)

    def words(self, start: int, count: int, purpose: int = PURPOSE_STEPS) -> np.ndarray:
        out = np.empty(count, dtype=np.uint64)
        _fill_words(_u64(self.master_seed), _u64(self.stream_id), _u64(purpose),
                    start, count, out)
        return out

    def steps(self, count: int, start: int = 0) -> np.ndarray:
        """Steps ``start+1 .. start+count`` as an int8 array of +1 (boy) / -1 (girl)."""
        if count <= 0:
            return np.empty(0, dtype=np.int8)
        w0 = start // 64
        w1 = (start + count - 1) // 64
        words = self.words(w0, w1 - w0 + 1)
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        off = start - 64 * w0
        return (2 * bits[off:off + count].astype(np.int8) - 1).astype(np.int8)
