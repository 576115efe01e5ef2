"""The ten acceptance criteria as runnable checks.

Each ``criterion_N(plan)`` returns a :class:`CriterionResult` holding one
:class:`Check` per pinned tolerance.  Sample sizes named in a criterion are
fixed; a reduced :class:`Plan` only trims the extras (replicate counts used
for shrinkage medians, bootstrap resamples, the per-length enumeration sweep).
"""
from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import exact, kappa as kappa_mod, ldp, limits
from .strategies import Doubling, PBoys, PBoysMore, SqrtBoundary
from .walk import simulate_batch

SEED = 20261016
FULL_BUDGET_MINUTES = 5.0


@dataclass(frozen=True)
class Plan:
    name: str = "full"
    shrink_reps: int = 5       # replicate batches for the median shrinkage check
    sqrt_shrink_reps: int = 3
    boot: int = 200
    all_lengths: bool = True   # enumerate every length 1..20, not only 20

    @property
    def reduced(self) -> bool:
        return self.name != "full"


FULL = Plan()
REDUCED = Plan("reduced", shrink_reps=3, sqrt_shrink_reps=1, boot=100, all_lengths=False)


def plan_for_budget(minutes: float) -> Plan:
    return FULL if minutes >= FULL_BUDGET_MINUTES else REDUCED


@dataclass(frozen=True)
class Check:
    label: str
    value: object
    target: str
    ok: bool

    def as_dict(self):
        v = self.value
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        return {"label": self.label, "value": v, "target": self.target, "ok": bool(self.ok)}


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    plan: str = "full"
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, label, value, target, ok):
        self.checks.append(Check(label, value, target, bool(ok)))

    def line(self) -> str:
        bad = [c.label for c in self.checks if not c.ok]
        tail = f"  failed: {', '.join(bad)}" if bad else ""
        tag = " (reduced)" if self.plan != "full" else ""
        return (f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}"
                f"{tag}  {self.title}  [{len(self.checks) - len(bad)}/{len(self.checks)} checks]{tail}")

    def as_dict(self):
        # wall-clock deliberately left out so reruns hash identically
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "plan": self.plan, "checks": [c.as_dict() for c in self.checks],
                "info": _plain(self.info)}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(plan: Plan = FULL):
        t0 = time.perf_counter()
        res = fn(plan)
        res.plan = plan.name
        res.seconds = time.perf_counter() - t0
        return res
    return wrapper


# ---------------------------------------------------------------- 1

def _match_oracle(pmf, oracle_marg, upto):
    return all(pmf[j] == oracle_marg[j] for j in range(upto + 1))


@_timed
def criterion_1(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(1, "exact pmfs equal path enumeration (rational)")
    lengths = range(1, 21) if plan.all_lengths else (20,)
    cases = [("p boys", p, PBoys(p)) for p in (1, 2, 3)]
    cases += [("p boys more", p, PBoysMore(p)) for p in (1, 2)]
    cases += [("doubling", None, Doubling())]
    for name, p, spec in cases:
        ok = True
        for L in lengths:
            orc = exact.enumerate_paths_oracle(spec, L)
            if name == "p boys":
                upto = L - p
                if upto < 0:
                    continue
                got = exact.pmf_girls_p_boys(p, upto, exact=True)
                ok &= _match_oracle(got, orc.marginal("girls"), upto)
            elif name == "p boys more":
                upto = (L - p) // 2
                if upto < 0:
                    continue
                got = exact.pmf_girls_p_boys_more(p, upto, exact=True)
                ok &= _match_oracle(got, orc.marginal("girls"), upto)
            else:
                got = exact.pmf_chi(L, exact=True)
                marg = orc.marginal("tau")
                ok &= all(got[k] == marg[k] for k in range(1, L + 1))
                ok &= (1 - sum(got.masses, 0)) == orc.defect
        label = name + (f"({p})" if p else "")
        res.add(label, ok, f"exact equality, lengths {lengths[0]}..20", ok)
    return res


# ---------------------------------------------------------------- 2

@_timed
def criterion_2(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(2, "averaged ratio constants from 10^6 families")
    n = 10**6
    k = exact.ExactConstants()
    b1 = simulate_batch(PBoys(1), n, SEED + 2)
    s1 = limits.ratio_series(b1)
    b2 = simulate_batch(PBoysMore(1), n, SEED + 2, cap=limits.LIMIT_CAP, first_id=n)
    s2 = limits.ratio_series(b2)
    frac1 = b1.girls / (b1.girls + b1.boys)
    frac2 = b2.girls / (b2.girls + b2.boys)
    rat2 = b2.girls / b2.boys
    for label, est, target, sample in (
            ("barF p boys(1) vs 1-log 2", s1.barF[-1], k.first_boy_fraction, frac1),
            ("barF p boys more(1) vs 1-pi/4", s2.barF[-1], k.one_more_fraction, frac2),
            ("barR p boys more(1) vs 2log2-1", s2.barR[-1], k.one_more_ratio, rat2)):
        gap = abs(est - target)
        res.add(label, float(est), f"|est - {target:.6f}| < 0.005", gap < 0.005)
        res.info[label] = {"estimate": float(est), "target": target, "gap": gap,
                           "se": float(sample.std(ddof=1) / math.sqrt(n))}
    res.info["censored"] = [b1.n_censored, b2.n_censored]
    return res


# ---------------------------------------------------------------- 3

@functools.lru_cache(maxsize=4)
def _sqrt_reference(n: int, reps: int, seed: int):
    return limits.sqrt_strategy_scaled_deviation(1.0, kappa_mod.kappa(1.0), n, reps, seed=seed)


def _shrinkage(spec, reps, seed, ns, engine="auto", cap=None):
    """``|1 - R_n|`` at nested ``ns`` for ``reps`` independent batches (rows)."""
    n = max(ns)
    rows = []
    cens = 0
    for r in range(reps):
        kw = {} if cap is None else {"cap": cap}
        b = simulate_batch(spec, n, seed, engine=engine, first_id=r * n, **kw)
        cens += b.n_censored
        if b.n_censored:
            keep = ~b.censored
            b = b.select(keep)
        rows.append(np.abs(limits.one_minus_r(b, [m for m in ns if m <= len(b)])))
    return np.array(rows), cens


@_timed
def criterion_3(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(3, "R_n -> 1 at the predicted scale, shrinking in n")
    ns = [10**4, 10**5, 10**6]
    n = ns[-1]

    dev, cens = _shrinkage(PBoys(2), plan.shrink_reps, SEED + 3, ns)
    med = np.median(dev, axis=0)
    res.add("p boys(2): |R_n - 1| at 1e6", float(dev[:, -1].max()), "< 0.01 (every replicate)",
            dev[:, -1].max() < 0.01)
    res.add("p boys(2): median shrinks", med.tolist(), "strictly decreasing", np.all(np.diff(med) < 0))

    dev, c2 = _shrinkage(PBoysMore(1), plan.shrink_reps, SEED + 3, ns, cap=limits.LIMIT_CAP)
    med = np.median(dev, axis=0)
    scaled = 0.5 * n * dev[:, -1]
    lo, hi = limits.chi2_1_quantile(0.001), limits.chi2_1_quantile(0.999)
    res.add("p boys more(1): |R_n - 1| at 1e6", float(dev[:, -1].max()), "< 0.001",
            dev[:, -1].max() < 0.001)
    res.add("p boys more(1): n(1-R_n)/2 in chi2_1 bulk", scaled.tolist(),
            f"in [{lo:.3g}, {hi:.3g}] (0.1%..99.9% quantiles)",
            np.all((scaled >= lo) & (scaled <= hi)))
    res.add("p boys more(1): median shrinks", med.tolist(), "strictly decreasing",
            np.all(np.diff(med) < 0))

    ref = _sqrt_reference(500, 2000, SEED + 10)
    k1 = kappa_mod.kappa(1.0)
    dev, c3 = _shrinkage(SqrtBoundary(1.0), plan.sqrt_shrink_reps, SEED + 3, ns,
                         engine="leap", cap=limits.SQRT_CAP)
    med = np.median(dev, axis=0)
    scale = n ** (1 / (2 * k1))
    qlo, qhi = np.quantile(ref.scaled, [0.001, 0.999])
    sc = scale * dev[:, -1]
    res.add("sqrt(1): n^(1/2k)|1-R_n| at 1e6", sc.tolist(),
            f"in [{qlo:.3g}, {qhi:.3g}] (0.1%..99.9% of the n=500 scaled law)",
            np.all((sc >= qlo) & (sc <= qhi)))
    res.add("sqrt(1): median shrinks", med.tolist(), "strictly decreasing", np.all(np.diff(med) < 0))
    res.info.update(censored=[cens, c2, c3], kappa=k1, ns=ns,
                    replicates=[plan.shrink_reps, plan.shrink_reps, plan.sqrt_shrink_reps])
    return res


# ---------------------------------------------------------------- 4

@_timed
def criterion_4(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(4, "chi-squared(1) limit of n(1-R_n)/2")
    x = limits.chi2_limit_samples(1, 500, 1000, seed=SEED + 4)
    g = limits.ks_test(x, limits.chi2_1_cdf)
    med_target = limits.chi2_1_quantile(0.5)
    med = float(np.median(x))
    res.add("KS D vs chi2_1", g.D, "< 0.08", g.D < 0.08)
    res.add("sample median", med, f"|med - {med_target:.4f}| < 0.05", abs(med - med_target) < 0.05)
    res.add("samples positive", bool(np.all(x > 0)), "all > 0", np.all(x > 0))
    res.info.update(ks=g.as_dict(), chi2_median=med_target)
    return res


# ---------------------------------------------------------------- 5

@_timed
def criterion_5(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(5, "Laplace transform limit of f(exp(-s/n^2))^n")
    for s in (0.5, 1.0, 2.0):
        gaps = [limits.laplace_limit_check(1, s, n) for n in (10**2, 10**3, 10**4)]
        res.add(f"s={s}: gap at n=1e4", gaps[-1], "< 1e-3", gaps[-1] < 1e-3)
        res.add(f"s={s}: gap decreasing", gaps, "strictly decreasing", gaps[0] > gaps[1] > gaps[2])
    return res


# ---------------------------------------------------------------- 6

@_timed
def criterion_6(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(6, "stable(1/2) law of n^-2 sum X")
    x = limits.stable_sum_samples(1, 500, 2000, seed=SEED + 6)
    g = limits.ks_test(x, lambda v: limits.stable_cdf(1.0, v))
    res.add("KS D vs stable cdf", g.D, "< 0.06", g.D < 0.06)
    norm = limits.stable_normalization(1.0)
    res.add("density integrates to 1", norm, "|int - 1| < 1e-6", abs(norm - 1) < 1e-6)
    for s in (0.5, 1.0, 2.0):
        lt = limits.stable_laplace(1.0, s)
        gap = abs(lt - math.exp(-math.sqrt(s)))
        res.add(f"Laplace transform s={s}", gap, "< 1e-6", gap < 1e-6)
    res.info["ks"] = g.as_dict()
    return res


# ---------------------------------------------------------------- 7

@_timed
def criterion_7(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(7, "tail exponent kappa(c): solver and Monte Carlo")
    grid = [round(0.1 * i, 1) for i in range(1, 31)]
    rs = kappa_mod.kappa_grid(grid)
    ks = np.array([r.kappa for r in rs])
    res.add("kappa strictly decreasing on 0.1..3.0", bool(np.all(np.diff(ks) < 0)),
            "strictly decreasing", np.all(np.diff(ks) < 0))
    lo_end, hi_end = kappa_mod.lambda0(0.01), kappa_mod.lambda0(6.0)
    res.add("kappa(0.01)", lo_end.kappa, "> 0.45", lo_end.kappa > 0.45)
    res.add("kappa(6)", hi_end.kappa, "< 0.05", hi_end.kappa < 0.05)
    resid = max(r.residual for r in rs + [lo_end, hi_end])
    res.add("max residual |D(-c)|", resid, "< 1e-10", resid < 1e-10)
    mc = {}
    for c in (0.5, 1.0, 2.0):
        fit = kappa_mod.tail_exponent_mc(c, families=10**5, cap=10**6, boot=plan.boot, seed=SEED + 7)
        k = kappa_mod.kappa(c)
        gap = abs(fit.kappa_hat - k)
        res.add(f"c={c}: |kappa_hat - kappa|", gap,
                f"<= CI half-width {fit.half_width:.4g} and half-width <= 0.05",
                gap <= fit.half_width and fit.half_width <= 0.05)
        mc[c] = {"kappa": k, "kappa_hat": fit.kappa_hat, "ci": fit.ci, "alpha_hat": fit.alpha_hat,
                 "censored": fit.censored}
    res.info.update(grid={c: r.kappa for c, r in zip(grid, rs)}, monte_carlo=mc)
    return res


# ---------------------------------------------------------------- 8

@_timed
def criterion_8(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(8, "large deviations rate for the girls total")
    fit = ldp.rate_fit(1, 1.0, [64, 128, 256, 512])
    target = math.log(32 / 27)
    rel = abs(fit.fitted_rate - target) / target
    res.add("OLS slope on n=64..512", fit.fitted_rate, f"within 1% of {target:.6f}", rel < 0.01)
    z = ldp.saddle_z(1, 1.0)
    d = ldp.eta_derivative(1, 1.0, z)
    res.add("eta'(z_hat)", d, "|.| < 1e-8", abs(d) < 1e-8)
    gap = abs(math.exp(-ldp.eta(1, 1.0, z)) - ldp.rho(1, 1.0))
    res.add("exp(-eta(z_hat)) - rho", gap, "< 1e-12", gap < 1e-12)
    ok = True
    for c in (1.0, 2.0):
        for n in (1, 2, 3):
            ok &= ldp.exact_prob_sum_le(1, c, n, exact=True) == ldp.enumerated_prob_sum_le(1, c, n)
    res.add("DP == enumeration, n<=3", ok, "exact equality at c in {1, 2}", ok)
    res.info.update(target=target, relative_error=rel, slope_with_log_term=fit.rate_with_log,
                    log_term_relative_error=abs(fit.rate_with_log - target) / target,
                    rates=fit.rates, exact_probs=fit.exact_probs)
    return res


# ---------------------------------------------------------------- 9

@_timed
def criterion_9(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(9, "doubling rule non-termination probability")
    n, cap = 10**6, 10**7
    b = simulate_batch(Doubling(), n, SEED + 9, cap=cap, engine="leap")
    mc = b.n_censored / n
    se = math.sqrt(mc * (1 - mc) / n)
    r = exact.chi_resolution(2000, mc, se)
    res.add("|series - Monte Carlo|", abs(r["series"] - mc), "< 0.01", abs(r["series"] - mc) < 0.01)
    same = r["series_match"] == r["mc_match"]
    res.add("closed form matched", r["series_match"], "series and Monte Carlo pick the same", same)
    res.info.update(resolution=r, cap=cap, families=n)
    return res


# --------------------------------------------------------------- 10

@_timed
def criterion_10(plan: Plan = FULL) -> CriterionResult:
    res = CriterionResult(10, "square-root rule: scaled deviation stabilises")
    k1 = kappa_mod.kappa(1.0)
    a = _sqrt_reference(500, 2000, SEED + 10)
    b = limits.sqrt_strategy_scaled_deviation(1.0, k1, 1000, 2000, seed=SEED + 10,
                                              first_id=500 * 2000)
    g = limits.ks_2sample(a.scaled, b.scaled)
    res.add("two-sample KS D, n=500 vs 1000", g.D, "< 0.05", g.D < 0.05)
    res.add("rebuilt identity", max(a.identity_gap, b.identity_gap), "relative gap < 1e-12",
            max(a.identity_gap, b.identity_gap) < 1e-12)
    sens = {k: limits.ks_2sample(a.sensitivity[k], b.sensitivity[k]).D for k in a.sensitivity}
    res.info.update(kappa=k1, ks=g.as_dict(), censored=[a.censored, b.censored],
                    sensitivity_D=sens, max_abs_Z=[float(np.abs(a.Z).max()), float(np.abs(b.Z).max())])
    return res


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def run_all(plan: Plan = FULL, only=None, progress=None) -> list[CriterionResult]:
    out = []
    for i, fn in CRITERIA.items():
        if only and i not in only:
            continue
        r = fn(plan)
        if progress:
            progress(r)
        out.append(r)
    return out
