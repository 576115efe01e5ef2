"""Family simulation under a stopping rule.

Two engines share one contract (first index where the rule holds, censored at
``cap``):

* ``walk``: replays the family's own coin-flip stream child by child (blocks
  of 64 children that cannot stop are skipped with a popcount).  Step-exact
  and reproducible against :class:`RngStream`.
* ``leap``: for rules of the form ``S_k >= g(k)`` with ``g`` non-decreasing,
  jumps over long stretches by sampling the first passage over the current
  level and, failing that, the conditioned endpoint.  Same law, different
  draws; needed when tau is astronomically large.

``auto`` picks ``leap`` for level rules with caps above ``LEAP_AUTO_CAP``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ParameterError
from .rng import RngStream, new_state, PURPOSE_STEPS
from .strategies import StrategySpec

DEFAULT_CAP = 10**6
MAX_WALK_CAP = 2**53
MAX_LEAP_CAP = 1e40
LEAP_AUTO_CAP = 10**5
CHUNK = 2048
ENGINES = ("auto", "walk", "leap")

_default_threads = 1


def set_default_threads(n: int) -> None:
    """Thread count used when ``simulate_batch`` is not given one."""
    global _default_threads
    if n < 1:
        raise ParameterError(f"threads must be >= 1, got {n}")
    _default_threads = int(n)


@dataclass(frozen=True)
class FamilyOutcome:
    tau: int
    girls: int
    boys: int
    censored: bool = False

    @property
    def surplus(self) -> int:
        return self.boys - self.girls


@dataclass(frozen=True, eq=False)
class FamilyBatch:
    """Outcomes of ``n`` families stored column-wise.

    ``tau`` and ``surplus`` (boys minus girls at the end) are float64 so that
    leap-engine families beyond 2**63 children fit; every entry below 2**53
    is an exact integer.  The surplus is kept as its own column because
    ``boys - girls`` loses it to rounding once ``tau`` is huge.
    """

    tau: np.ndarray
    surplus: np.ndarray
    censored: np.ndarray
    manifest: dict = field(default_factory=dict)

    @property
    def girls(self) -> np.ndarray:
        return 0.5 * (self.tau - self.surplus)

    @property
    def boys(self) -> np.ndarray:
        return 0.5 * (self.tau + self.surplus)

    def __len__(self) -> int:
        return self.tau.shape[0]

    def __getitem__(self, i) -> FamilyOutcome:
        t, d = int(self.tau[i]), int(self.surplus[i])
        return FamilyOutcome(t, (t - d) // 2, (t + d) // 2, bool(self.censored[i]))

    @property
    def outcomes(self) -> list[FamilyOutcome]:
        return [self[i] for i in range(len(self))]

    @property
    def cumulative_children(self) -> np.ndarray:
        return np.cumsum(self.tau)

    @property
    def n_censored(self) -> int:
        return int(self.censored.sum())

    def same_as(self, other: "FamilyBatch") -> bool:
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("tau", "surplus", "censored"))

    def select(self, idx) -> "FamilyBatch":
        return FamilyBatch(self.tau[idx], self.surplus[idx], self.censored[idx], dict(self.manifest))


def _check_cap(cap, limit):
    if not (cap >= 1 and cap <= limit and float(cap) == math.floor(cap)):
        raise ParameterError(f"cap must be an integer in [1, {limit:g}], got {cap!r}")


def simulate_family(spec: StrategySpec, rng: RngStream, cap: int = DEFAULT_CAP) -> FamilyOutcome:
    """Step-exact walk of one family on ``rng``'s coin flips."""
    if not isinstance(spec, StrategySpec):
        raise ParameterError(f"not a strategy: {spec!r}")
    _check_cap(cap, MAX_WALK_CAP)
    kind, p, c, form = spec.kernel_args()
    st = new_state(np.uint64(rng.master_seed), np.uint64(rng.stream_id), np.uint64(PURPOSE_STEPS))
    k, s, x, hit = _kernels.advance(st, kind, p, c, form, 0.0, 0.0, 0.0, float(cap))
    k, s, x = int(k), int(s), int(x)
    return FamilyOutcome(k, x, k - x, not hit)


def simulate_steps(spec: StrategySpec, steps, cap: int | None = None) -> FamilyOutcome:
    """Reference walk over an explicit sequence of +1 (boy) / -1 (girl) steps.

    The sequence must cover ``cap`` steps unless the rule stops earlier.
    """
    if not isinstance(spec, StrategySpec):
        raise ParameterError(f"not a strategy: {spec!r}")
    steps = np.asarray(steps, dtype=np.int64)
    if steps.size and not np.all(np.abs(steps) == 1):
        raise ParameterError("steps must be +1 or -1")
    cap = steps.size if cap is None else int(cap)
    _check_cap(cap, MAX_WALK_CAP)
    m = min(cap, steps.size)
    k = np.arange(1, m + 1)
    s = np.cumsum(steps[:m])
    hit = np.flatnonzero(spec.stops(k, s))
    if hit.size:
        t = int(hit[0]) + 1
        y = (t + int(s[t - 1])) // 2
        return FamilyOutcome(t, t - y, y, False)
    if m < cap:
        raise ParameterError(f"{m} steps given but the rule has not stopped before cap {cap}")
    y = (cap + int(s[-1])) // 2 if cap else 0
    return FamilyOutcome(cap, cap - y, y, True)


def pick_engine(spec: StrategySpec, cap, engine: str = "auto") -> str:
    if engine not in ENGINES:
        raise ParameterError(f"engine must be one of {ENGINES}, got {engine!r}")
    if engine == "leap" and not spec.level_type:
        raise ParameterError(f"leap engine needs a level-type rule, not {spec}")
    if engine == "auto":
        return "leap" if spec.level_type and cap > LEAP_AUTO_CAP else "walk"
    return engine


def simulate_batch(spec: StrategySpec, n: int, master_seed: int, cap=DEFAULT_CAP,
                   engine: str = "auto", threads: int | None = None, first_id: int = 0) -> FamilyBatch:
    """Simulate families with stream ids ``first_id .. first_id+n-1``.

    Work is cut into fixed chunks, so the result does not depend on ``threads``.
    """
    if not isinstance(spec, StrategySpec):
        raise ParameterError(f"not a strategy: {spec!r}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    RngStream(master_seed, first_id + n - 1)  # range check
    engine = pick_engine(spec, cap, engine)
    _check_cap(cap, MAX_WALK_CAP if engine == "walk" else MAX_LEAP_CAP)
    kernel = _kernels.walk_batch if engine == "walk" else _kernels.leap_batch
    kind, p, c, form = spec.kernel_args()

    tau = np.empty(n)
    surplus = np.empty(n)
    cens = np.empty(n, dtype=np.bool_)

    def run(lo):
        hi = min(lo + CHUNK, n)
        kernel(np.uint64(master_seed), first_id + lo, kind, p, c, form, float(cap),
               tau[lo:hi], surplus[lo:hi], cens[lo:hi])

    starts = range(0, n, CHUNK)
    threads = _default_threads if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(run, starts))
    else:
        for lo in starts:
            run(lo)

    manifest = {"strategy": str(spec), "n": n, "master_seed": master_seed, "cap": cap,
                "engine": engine, "first_id": first_id, "censored": int(cens.sum())}
    return FamilyBatch(tau, surplus, cens, manifest)
