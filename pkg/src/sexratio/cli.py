"""Command-line front end.

Every command writes its data files plus ``result.json`` and ``manifest.json``
into one run directory.  The manifest hashes the data files, so ``report`` can
tell a clean run from an edited one.  Data files never contain timings, so a
rerun with the same configuration reproduces them byte for byte.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, acceptance, exact, kappa as kappa_mod, ldp, limits, walk
from .errors import (IntegrityError, ParameterError, QualityError, ResourceError, SexRatioError,
                     SolverError)
from .strategies import Doubling, PBoys, PBoysMore, SqrtBoundary, parse_strategy

OUTPUT_ENV = "SEXRATIO_OUTPUT_DIR"
MANIFEST = "manifest.json"
RESULT = "result.json"
MANIFEST_SCHEMA = "sexratio/manifest@1"
RESULT_SCHEMA = "sexratio/result@1"
EXIT_CODES = {ParameterError: 2, QualityError: 3, IntegrityError: 4, SolverError: 5,
              ResourceError: 6}
KINDS = ("ratio", "limit", "kappa", "ldp", "exact", "chi", "acceptance")


class UsageError(ParameterError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    output_dir: str
    master_seed: int | None = None
    strategy: str | None = None
    n: int | None = None
    reps: int | None = None
    cap: float | None = None
    params: dict | None = None


# ------------------------------------------------------------ output

def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def content_hash(files: dict) -> str:
    h = hashlib.sha256()
    for name in sorted(files):
        h.update(f"{name}\0{files[name]}\n".encode())
    return h.hexdigest()


_active_run = None


class Run:
    """Collects the artifacts of one command and seals them with a manifest."""

    def __init__(self, config: ExperimentConfig):
        global _active_run
        _active_run = self
        self.config = config
        self.dir = Path(config.output_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.t0 = time.perf_counter()

    def csv(self, name, header, rows):
        with open(self.dir / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
        self.files.append(name)

    def json(self, name, obj):
        (self.dir / name).write_text(_dump(obj), encoding="utf-8")
        self.files.append(name)

    def finish(self, result: dict, claims=(), censored=None, provenance=None, partial=False):
        body = {"schema": RESULT_SCHEMA, "kind": self.config.kind, "result": result,
                "claims": list(claims), "partial": partial}
        self.json(RESULT, body)
        hashes = {f: _sha256(self.dir / f) for f in sorted(set(self.files))}
        manifest = {
            "schema": MANIFEST_SCHEMA,
            "version": __version__,
            "config": asdict(self.config),
            "files": hashes,
            "content_hash": content_hash(hashes),
            "censored": censored,
            "provenance": provenance or {},
            "partial": partial,
            # not part of the content hash
            "wall_clock_s": round(time.perf_counter() - self.t0, 3),
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }
        (self.dir / MANIFEST).write_text(_dump(manifest), encoding="utf-8")
        return manifest

    def abort(self, exc: QualityError):
        """Seal what exists so far, flagged partial."""
        part = exc.partial
        if isinstance(part, walk.FamilyBatch):
            self.csv("families_partial.csv", ["family", "tau", "girls", "boys", "censored"],
                     ((i, part.tau[i], part.girls[i], part.boys[i], int(part.censored[i]))
                      for i in range(len(part))))
        return self.finish({"error": str(exc)}, censored=getattr(part, "n_censored", None),
                           partial=True)


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    return v


def claim(name, value, target, ok):
    return {"claim": name, "value": value, "target": target, "pass": bool(ok)}


def verify_run_dir(path) -> dict:
    """Check one run directory against its manifest; raise :class:`IntegrityError` if it differs."""
    path = Path(path)
    mpath = path / MANIFEST
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IntegrityError(f"{mpath}: unreadable manifest ({exc})") from None
    if manifest.get("schema") != MANIFEST_SCHEMA or not isinstance(manifest.get("files"), dict):
        raise IntegrityError(f"{mpath}: not a {MANIFEST_SCHEMA} document")
    for name, digest in manifest["files"].items():
        f = path / name
        if not f.is_file():
            raise IntegrityError(f"{path}: missing artifact {name}")
        if _sha256(f) != digest:
            raise IntegrityError(f"{path}: {name} does not match its recorded hash")
    if content_hash(manifest["files"]) != manifest.get("content_hash"):
        raise IntegrityError(f"{mpath}: content hash mismatch")
    return manifest


# -------------------------------------------------------------- config

def read_config(path) -> dict:
    """``key = value`` lines (``#`` comments allowed); no section header needed."""
    text = Path(path).read_text(encoding="utf-8")
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in cp["config"].items()}


def _base_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "sexratio-results"))


def _out_dir(args, default_name) -> str:
    return str(args.out) if args.out else str(_base_dir() / default_name)


def _float_list(text):
    try:
        return [float(t) for t in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _int_list(text):
    vals = _float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")
    return [int(v) for v in vals]


def _count(text):
    # accepts 1e6 style counts
    v = float(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


# ------------------------------------------------------------ commands

def cmd_simulate(args):
    spec = parse_strategy(args.strategy)
    cfg = ExperimentConfig("ratio", _out_dir(args, "simulate"), args.seed, str(spec), args.n,
                           None, args.cap, {"engine": args.engine, "stride": args.stride,
                                            "families": args.families})
    run = Run(cfg)
    batch = walk.simulate_batch(spec, args.n, args.seed, cap=args.cap, engine=args.engine)
    kept = int(len(batch) - batch.n_censored)
    claims = []
    result = {"strategy": str(spec), "n": args.n, "censored": batch.n_censored,
              "engine": batch.manifest["engine"]}
    if kept:
        series = limits.ratio_series(batch)
        idx = np.unique(np.r_[np.arange(args.stride - 1, len(series), args.stride), len(series) - 1])
        run.csv("ratio_series.csv", ["n", "R", "F", "barR", "barF"],
                ((i + 1, series.R[i], series.F[i], series.barR[i], series.barF[i]) for i in idx))
        result["final"] = series.at(len(series))
        claims += _simulate_claims(spec, batch, series)
    if args.families:
        run.csv("families.csv", ["family", "tau", "girls", "boys", "censored"],
                ((i, batch.tau[i], batch.girls[i], batch.boys[i], int(batch.censored[i]))
                 for i in range(len(batch))))
    run.finish(result, claims, censored=batch.n_censored,
               provenance={"constants": exact.ExactConstants().expressions})
    return result


def _simulate_claims(spec, batch, series):
    out = []
    keep = ~batch.censored
    with np.errstate(invalid="ignore"):
        gap = np.nanmax(np.abs(series.F - series.R / (1 + series.R)))
    out.append(claim("F_n = R_n/(1+R_n) on every prefix", float(gap), "< 1e-12", gap < 1e-12))
    k = exact.ExactConstants()
    n = int(keep.sum())
    if isinstance(spec, PBoys):
        g = batch.girls[keep]
        se = g.std(ddof=1) / math.sqrt(n) if n > 1 else math.inf
        out.append(claim(f"mean girls = {spec.p}", float(g.mean()), f"within 3 SE ({3 * se:.3g})",
                         abs(g.mean() - spec.p) <= 3 * se))
        if spec.p == 1:
            out.append(claim("barF -> 1 - log 2", float(series.barF[-1]), f"{k.first_boy_fraction:.6f} +- 0.005",
                             abs(series.barF[-1] - k.first_boy_fraction) < 0.005))
    if isinstance(spec, PBoysMore):
        ok = bool(np.all(batch.surplus[keep] == spec.p))
        out.append(claim(f"every family ends with surplus {spec.p}", ok, "all", ok))
        if spec.p == 1:
            out.append(claim("barF -> 1 - pi/4", float(series.barF[-1]),
                             f"{k.one_more_fraction:.6f} +- 0.005",
                             abs(series.barF[-1] - k.one_more_fraction) < 0.005))
            out.append(claim("barR -> 2 log 2 - 1", float(series.barR[-1]),
                             f"{k.one_more_ratio:.6f} +- 0.005",
                             abs(series.barR[-1] - k.one_more_ratio) < 0.005))
    if isinstance(spec, SqrtBoundary):
        t = batch.tau[keep]
        exactly = t < 2**53
        ok = bool(np.all(batch.surplus[keep][exactly] == np.ceil(spec.c * np.sqrt(t[exactly]))))
        out.append(claim("surplus = ceil(c sqrt(tau)) at the stop", ok, "all (tau < 2^53)", ok))
    return out


def cmd_exact(args):
    cfg = ExperimentConfig("exact", _out_dir(args, "exact"), None, args.pmf, None, None, None,
                           {"jmax": args.jmax, "exact": args.exact})
    run = Run(cfg)
    spec = parse_strategy(args.pmf)
    if isinstance(spec, PBoys):
        pmf = exact.pmf_girls_p_boys(spec.p, args.jmax, exact=args.exact)
        what = "girls"
    elif isinstance(spec, PBoysMore):
        pmf = exact.pmf_girls_p_boys_more(spec.p, args.jmax, exact=args.exact)
        what = "girls"
    elif isinstance(spec, Doubling):
        pmf = exact.pmf_chi(args.jmax, exact=args.exact)
        what = "tau"
    else:
        raise UsageError(f"no exact pmf for {spec}; use pboys:p, pboysmore:p or doubling")
    header = ["j", "mass", "cumulative"] + (["mass_exact"] if pmf.exact else [])
    cum = 0.0
    rows = []
    for j, m in zip(pmf.support.tolist(), pmf.masses):
        cum += float(m)
        rows.append([j, float(m), cum] + ([str(m)] if pmf.exact else []))
    run.csv("pmf.csv", header, rows)
    result = {"strategy": str(spec), "variable": what, "jmax": args.jmax,
              "defect": str(pmf.defect) if pmf.exact else float(pmf.defect),
              "listed_mass": str(pmf.total() - pmf.defect) if pmf.exact else float(pmf.total() - pmf.defect)}
    claims = [claim("masses + defect = 1", str(pmf.total()) if pmf.exact else float(pmf.total()),
                    "1", pmf.total() == 1 if pmf.exact else abs(pmf.total() - 1) < 1e-12)]
    run.finish(result, claims)
    return result


def cmd_limitcheck(args):
    cfg = ExperimentConfig("limit", _out_dir(args, f"limitcheck-{args.law}"), args.seed, None,
                           args.n, args.reps, None,
                           {"law": args.law, "p": args.p, "c": args.c, "s": args.s})
    run = Run(cfg)
    claims = []
    if args.law == "chi2":
        x = limits.chi2_limit_samples(args.p, args.n, args.reps, seed=args.seed)
        g = limits.ks_test(x, limits.chi2_1_cdf)
        med = limits.chi2_1_quantile(0.5)
        claims += [claim("KS D vs chi2_1 cdf", g.D, "< 0.08", g.D < 0.08),
                   claim("median near chi2_1 median", float(np.median(x)), f"{med:.4f} +- 0.05",
                         abs(np.median(x) - med) < 0.05)]
        run.csv("samples.csv", ["rep", "scaled"], enumerate(x))
        result = {"gof": g.as_dict(), "median": float(np.median(x))}
    elif args.law == "stable":
        x = limits.stable_sum_samples(args.p, args.n, args.reps, seed=args.seed)
        g = limits.ks_test(x, lambda v: limits.stable_cdf(args.p, v))
        claims.append(claim("KS D vs stable cdf", g.D, "< 0.06", g.D < 0.06))
        run.csv("samples.csv", ["rep", "scaled_sum"], enumerate(x))
        result = {"gof": g.as_dict()}
    elif args.law == "laplace":
        ns = [10**2, 10**3, 10**4]
        gaps = [limits.laplace_limit_check(args.p, args.s, n) for n in ns]
        run.csv("laplace_gaps.csv", ["n", "gap"], zip(ns, gaps))
        claims += [claim("gap at n=1e4", gaps[-1], "< 1e-3", gaps[-1] < 1e-3),
                   claim("gap decreasing in n", gaps, "strictly", gaps[0] > gaps[1] > gaps[2])]
        result = {"s": args.s, "gaps": gaps}
    else:
        k = kappa_mod.kappa(args.c)
        a = limits.sqrt_strategy_scaled_deviation(args.c, k, args.n, args.reps, seed=args.seed)
        b = limits.sqrt_strategy_scaled_deviation(args.c, k, 2 * args.n, args.reps, seed=args.seed,
                                                  first_id=args.n * args.reps)
        g = limits.ks_2sample(a.scaled, b.scaled)
        claims.append(claim("two-sample KS D between n and 2n", g.D, "< 0.05", g.D < 0.05))
        run.csv("samples.csv", ["rep", "scaled_n", "scaled_2n", "ratio_stat_n", "ratio_stat_2n"],
                zip(range(args.reps), a.scaled, b.scaled, a.ratio_stat, b.ratio_stat))
        result = {"kappa": k, "gof": g.as_dict(), "identity_gap": max(a.identity_gap, b.identity_gap),
                  "censored": a.censored + b.censored,
                  "sensitivity_D": {str(kk): limits.ks_2sample(a.sensitivity[kk], b.sensitivity[kk]).D
                                    for kk in a.sensitivity}}
    run.finish(result, claims)
    return result


def cmd_kappa(args):
    params = {"grid": args.grid, "mc": args.mc, "families": args.families, "mc_cap": args.mc_cap}
    cfg = ExperimentConfig("kappa", _out_dir(args, "kappa"), args.seed, None, None, None, None,
                           dict(params, c=args.c))
    run = Run(cfg)
    claims = []
    if args.grid:
        lo, hi, step = args.grid
        cs = np.round(np.arange(lo, hi + step / 2, step), 12)
        rs = kappa_mod.kappa_grid(cs)
        run.csv("kappa_grid.csv", ["c", "lambda0", "kappa", "residual"],
                ((r.c, r.lambda0, r.kappa, r.residual) for r in rs))
        ks = np.array([r.kappa for r in rs])
        claims.append(claim("kappa decreasing in c", bool(np.all(np.diff(ks) < 0)), "strictly",
                            np.all(np.diff(ks) < 0)))
        result = {"grid": [r.as_dict() for r in rs]}
    else:
        r = kappa_mod.lambda0(args.c)
        result = r.as_dict()
        claims.append(claim("residual |D(-c)|", r.residual, "< 1e-10", r.residual < 1e-10))
        if args.mc:
            fit = kappa_mod.tail_exponent_mc(args.c, families=args.families, cap=args.mc_cap,
                                             seed=args.seed)
            gap = abs(fit.kappa_hat - r.kappa)
            result["monte_carlo"] = {"kappa_hat": fit.kappa_hat, "ci": list(fit.ci),
                                     "alpha_hat": fit.alpha_hat, "censored": fit.censored}
            claims.append(claim("Monte Carlo kappa within its CI", gap,
                                f"<= {fit.half_width:.4g} (half-width <= 0.05)",
                                gap <= fit.half_width <= 0.05))
            run.csv("survival.csv", ["k", "survival"], zip(fit.ks, fit.survival))
        run.json("kappa.json", r.as_dict())
    run.finish(result, claims)
    return result


def cmd_ldp(args):
    cfg = ExperimentConfig("ldp", _out_dir(args, "ldp"), None, None, None, None, None,
                           {"p": args.p, "c": args.c, "ngrid": args.ngrid})
    run = Run(cfg)
    fit = ldp.rate_fit(args.p, args.c, args.ngrid)
    run.csv("rates.csv", ["n", "log_P", "P", "a_n"],
            ((n, lp, math.exp(lp), a) for (n, lp), a in zip(fit.exact_probs, fit.rates)))
    run.json("ldp.json", fit.as_dict())
    rel = abs(fit.fitted_rate - fit.target_rate) / fit.target_rate
    claims = [claim("OLS slope vs -log rho", fit.fitted_rate, f"{fit.target_rate:.6f} within 1%",
                    rel < 0.01),
              claim("rho in (0, 1)", fit.rho, "(0, 1)", 0 < fit.rho < 1)]
    run.finish(fit.as_dict(), claims)
    return fit.as_dict()


def cmd_chi(args):
    cfg = ExperimentConfig("chi", _out_dir(args, "chi"), args.seed, "doubling", args.families,
                           None, args.cap, {"terms": args.terms})
    run = Run(cfg)
    mc = se = None
    cens = None
    if args.families:
        b = walk.simulate_batch(Doubling(), args.families, args.seed, cap=args.cap)
        cens = b.n_censored
        mc = cens / args.families
        se = math.sqrt(mc * (1 - mc) / args.families)
    res = exact.chi_resolution(args.terms, mc, se)
    claims = []
    if mc is not None:
        claims.append(claim("series vs Monte Carlo", abs(res["series"] - mc), "< 0.01",
                            abs(res["series"] - mc) < 0.01))
    run.finish(res, claims, censored=cens,
               provenance={"chi_infinity": exact.ExactConstants().provenance["chi_infinity"]})
    return res


def cmd_verify_all(args):
    plan = acceptance.plan_for_budget(args.budget)
    cfg = ExperimentConfig("acceptance", _out_dir(args, "verify-all"), acceptance.SEED, None, None,
                           None, None, {"budget_minutes": args.budget, "plan": plan.name,
                                        "only": args.only})
    run = Run(cfg)
    t0 = time.perf_counter()
    results = acceptance.run_all(plan, only=args.only,
                                 progress=lambda r: print(r.line(), flush=True))
    spent = time.perf_counter() - t0
    run.csv("acceptance.csv", ["criterion", "check", "value", "target", "pass"],
            ((r.number, c.label, json.dumps(c.as_dict()["value"], default=_json_default), c.target,
              int(c.ok)) for r in results for c in r.checks))
    claims = [claim(f"criterion {r.number}: {r.title}", r.passed, "all checks pass", r.passed)
              for r in results]
    body = {"plan": plan.name, "reduced": plan.reduced,
            "criteria": [r.as_dict() for r in results]}
    run.finish(body, claims)
    over = spent > 60 * args.budget
    print(f"plan={plan.name}  {sum(r.passed for r in results)}/{len(results)} criteria pass"
          f"  ({spent:.0f} s{', over budget' if over else ''})")
    if not all(r.passed for r in results):
        return 1
    return body


def cmd_report(args):
    root = Path(args.dir) if args.dir else _base_dir()
    if not root.is_dir():
        raise IntegrityError(f"{root}: not a results directory")
    found = sorted(p.parent for p in root.rglob(MANIFEST))
    if not found:
        raise IntegrityError(f"{root}: no {MANIFEST} found")
    lines = []
    total = failed = 0
    for d in found:
        manifest = verify_run_dir(d)
        try:
            body = json.loads((d / RESULT).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise IntegrityError(f"{d}: unreadable {RESULT} ({exc})") from None
        rel = d.relative_to(root) if d != root else Path(".")
        tag = " [partial]" if body.get("partial") else ""
        lines.append(f"== {rel} ({manifest['config']['kind']}){tag}")
        for c in body.get("claims", []):
            total += 1
            failed += not c["pass"]
            val = c["value"]
            if isinstance(val, float):
                val = f"{val:.6g}"
            lines.append(f"  {'PASS' if c['pass'] else 'FAIL'}  {c['claim']}: {val} (target {c['target']})")
    lines.append(f"{total - failed}/{total} claims pass in {len(found)} run(s)")
    print("\n".join(lines))
    return {"runs": len(found), "claims": total, "failed": failed}


# ----------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sexratio",
        description="Family stopping rules for a fair coin: simulation, exact laws and limit checks.",
        epilog=f"Run directories default to ${OUTPUT_ENV}/<command> (or ./sexratio-results/<command>).")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for simulation (default: 1)")
    ap.add_argument("--config", help="key = value file; explicit flags override it")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    def common(p, seed=True):
        p.add_argument("--out", help="run directory (default: see below)")
        if seed:
            p.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")

    p = sub.add_parser("simulate", help="simulate families and write the running ratios")
    common(p)
    p.add_argument("--strategy", default="pboysmore:1",
                   help="pboys:P, pboysmore:P, sqrt:C, girlsbound[:plain|:loglog]:C, "
                        "childbound[:plain|:loglog]:C or doubling (default: pboysmore:1)")
    p.add_argument("--n", type=_count, default=100000, help="number of families (default: 100000)")
    p.add_argument("--cap", type=float, default=float(walk.DEFAULT_CAP),
                   help=f"censoring cap on children per family (default: {walk.DEFAULT_CAP})")
    p.add_argument("--engine", choices=walk.ENGINES, default="auto", help="(default: auto)")
    p.add_argument("--stride", type=int, default=1, help="write every stride-th prefix (default: 1)")
    p.add_argument("--families", action="store_true", help="also write one row per family")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", help="exact pmf of girls (or of tau for doubling)")
    common(p, seed=False)
    p.add_argument("--pmf", default="pboysmore:1", help="pboys:P, pboysmore:P or doubling (default: pboysmore:1)")
    p.add_argument("--jmax", type=int, default=20, help="last support point (default: 20)")
    p.add_argument("--exact", action="store_true", help="rational masses (adds a mass_exact column)")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("limitcheck", help="Monte Carlo check of a limit law")
    common(p)
    p.add_argument("--law", choices=("chi2", "stable", "laplace", "sqrt"), default="chi2",
                   help="(default: chi2)")
    p.add_argument("--p", type=int, default=1, help="boys surplus for chi2/stable/laplace (default: 1)")
    p.add_argument("--c", type=float, default=1.0, help="square-root constant for sqrt (default: 1)")
    p.add_argument("--s", type=float, default=1.0, help="Laplace argument (default: 1)")
    p.add_argument("--n", type=_count, default=500, help="families per replicate (default: 500)")
    p.add_argument("--reps", type=_count, default=1000, help="replicates (default: 1000)")
    p.set_defaults(func=cmd_limitcheck)

    p = sub.add_parser("kappa", help="tail exponent kappa(c) of the square-root rule")
    common(p)
    p.add_argument("--c", type=float, default=1.0, help="boundary constant (default: 1)")
    p.add_argument("--grid", type=_float_list, help="'start stop step' grid; writes kappa_grid.csv")
    p.add_argument("--mc", action="store_true", help="add the Monte Carlo tail regression")
    p.add_argument("--families", type=_count, default=10**5, help="Monte Carlo families (default: 1e5)")
    p.add_argument("--mc-cap", type=float, default=1e6, help="Monte Carlo cap (default: 1e6)")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("ldp", help="large deviations rate of the girls total")
    common(p, seed=False)
    p.add_argument("--p", type=int, default=1, help="(default: 1)")
    p.add_argument("--c", type=float, default=1.0, help="(default: 1)")
    p.add_argument("--ngrid", type=_int_list, default=[64, 128, 256, 512],
                   help="family counts for the fit (default: '64 128 256 512')")
    p.set_defaults(func=cmd_ldp)

    p = sub.add_parser("chi", help="probability that the doubling rule never stops")
    common(p)
    p.add_argument("--terms", type=int, default=2000, help="series terms (default: 2000)")
    p.add_argument("--families", type=_count, default=0,
                   help="Monte Carlo families, 0 for series only (default: 0)")
    p.add_argument("--cap", type=float, default=1e7, help="Monte Carlo cap (default: 1e7)")
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("report", help="verify run directories and tabulate their claims")
    p.add_argument("dir", nargs="?", help=f"results directory (default: ${OUTPUT_ENV})")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify-all", help="run the acceptance criteria")
    common(p, seed=False)
    p.add_argument("--budget", type=float, default=15.0,
                   help=f"minutes; below {acceptance.FULL_BUDGET_MINUTES:g} runs the reduced plan (default: 15)")
    p.add_argument("--only", type=_int_list, help="criterion numbers to run")
    p.set_defaults(func=cmd_verify_all)
    ap.subcommands = sub.choices
    return ap


def _parse(argv):
    ap = build_parser()
    # raise instead of exiting so errors come out as JSON
    def fail(message):
        raise UsageError(message)
    ap.error = fail
    for subp in ap.subcommands.values():
        subp.error = fail
    args = ap.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        subp = ap.subcommands[args.command]
        known = {a.dest for a in subp._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        for a in subp._actions:
            if a.dest in cfg:
                if isinstance(a, argparse._StoreTrueAction):
                    cfg[a.dest] = cfg[a.dest].strip().lower() in ("1", "true", "yes", "on")
                elif a.type is not None:
                    try:
                        cfg[a.dest] = a.type(cfg[a.dest])
                    except (ValueError, argparse.ArgumentTypeError) as exc:
                        raise UsageError(f"config key {a.dest}: {exc}") from None
        subp.set_defaults(**cfg)
        args = ap.parse_args(argv)
    return args


def _error_json(exc, code):
    doc = {"schema": "sexratio/error@1", "error": type(exc).__name__, "message": str(exc),
           "exit_code": code}
    if isinstance(exc, QualityError) and exc.partial is not None:
        doc["partial"] = True
    if isinstance(exc, SolverError) and exc.samples:
        doc["samples"] = exc.samples[:20]
    return json.dumps(doc, default=_json_default)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    global _active_run
    _active_run = None
    try:
        args = _parse(argv)
        walk.set_default_threads(args.threads)
        out = args.func(args)
        return out if isinstance(out, int) else 0
    except SexRatioError as exc:
        if isinstance(exc, QualityError) and _active_run is not None:
            _active_run.abort(exc)
        code = next((c for t, c in EXIT_CODES.items() if isinstance(exc, t)), 1)
        print(_error_json(exc, code), file=sys.stderr)
        return code
    except OSError as exc:
        print(_error_json(exc, 1), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
