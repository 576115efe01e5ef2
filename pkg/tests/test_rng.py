import numpy as np
import pytest
from scipy import stats

from sexratio.rng import RngStream, philox4x64, PURPOSE_LEAP, PURPOSE_STEPS

U = np.uint64
M = U(0xFFFFFFFFFFFFFFFF)


@pytest.mark.parametrize("ctr,key,expected", [
    ((0, 0, 0, 0), (0, 0),
     (0x16554d9eca36314c, 0xdb20fe9d672d0fdc, 0xd7e772cee186176b, 0x7e68b68aec7ba23b)),
    ((M, M, M, M), (M, M),
     (0x87b092c3013fe90b, 0x438c3c67be8d0224, 0x9cc7d7c69cd777b6, 0xa09caebf594f0ba0)),
    ((0x243f6a8885a308d3, 0x13198a2e03707344, 0xa4093822299f31d0, 0x082efa98ec4e6c89),
     (0x452821e638d01377, 0xbe5466cf34e90c6c),
     (0xa528f45403e61d95, 0x38c72dbd566e9788, 0xa5a1610e72fd18b5, 0x57bd43b5e52b7fe6)),
])
def test_philox_known_answers(ctr, key, expected):
    out = np.zeros(4, dtype=np.uint64)
    philox4x64(*(U(c) for c in ctr), *(U(k) for k in key), out)
    assert [int(v) for v in out] == list(expected)


def test_same_stream_same_steps():
    a = RngStream(7, 3).steps(1000)
    b = RngStream(7, 3).steps(1000)
    assert np.array_equal(a, b)


def test_streams_differ():
    base = RngStream(7, 3).steps(256)
    assert not np.array_equal(base, RngStream(7, 4).steps(256))
    assert not np.array_equal(base, RngStream(8, 3).steps(256))


def test_step_bits_follow_words():
    r = RngStream(11, 5)
    w = r.words(0, 2)
    st = r.steps(128)
    for i in range(128):
        bit = (int(w[i // 64]) >> (i % 64)) & 1
        assert st[i] == (1 if bit else -1)


def test_steps_offset_slices_agree():
    r = RngStream(1, 2)
    full = r.steps(300)
    assert np.array_equal(r.steps(100, start=150), full[150:250])
    assert r.steps(0).size == 0


def test_purposes_are_separate():
    r = RngStream(1, 2)
    assert not np.array_equal(r.words(0, 8, PURPOSE_STEPS), r.words(0, 8, PURPOSE_LEAP))


def test_steps_are_balanced_and_uncorrelated():
    s = RngStream(2024, 0).steps(10**6).astype(float)
    n = s.size
    # balance: (#boys - n/2) / sqrt(n/4) is standard normal
    z = s.sum() / np.sqrt(n)
    assert abs(z) < 4.5
    lag = (s[1:] * s[:-1]).sum() / np.sqrt(n)
    assert abs(lag) < 4.5


def test_cross_stream_bits_independent():
    a = np.array([RngStream(9, i).steps(1)[0] for i in range(4000)])
    b = np.array([RngStream(9, i).steps(2)[1] for i in range(4000)])
    table = np.histogram2d(a, b, bins=2)[0]
    assert stats.chi2_contingency(table)[1] > 1e-4


@pytest.mark.parametrize("seed,sid", [(-1, 0), (0, -1), (2**64, 0)])
def test_out_of_range_ids_rejected(seed, sid):
    with pytest.raises(ValueError):
        RngStream(seed, sid)
