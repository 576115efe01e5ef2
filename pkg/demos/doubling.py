"""Stop once boys are at least twice the girls.

This rule can run forever.  The chance that it does is a series over the
first-passage pmf; two closed forms are in circulation, and the series and a
capped simulation both say which one is right.

    python demos/doubling.py --families 200000
"""
import argparse
import math

from sexratio import walk
from sexratio.exact import CHI_CANDIDATES, chi_resolution, pmf_chi
from sexratio.strategies import Doubling


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--families", type=int, default=200_000)
    ap.add_argument("--cap", type=float, default=1e7)
    ap.add_argument("--seed", type=int, default=9)
    args = ap.parse_args()

    pmf = pmf_chi(12, exact=True)
    print("first stopping times and their exact masses:")
    for k, m in zip(pmf.support, pmf.masses):
        if m:
            print(f"  tau = {k:<3} {m}")

    batch = walk.simulate_batch(Doubling(), args.families, args.seed, cap=args.cap)
    p = batch.n_censored / args.families
    se = math.sqrt(p * (1 - p) / args.families)
    res = chi_resolution(2000, p, se)
    print(f"\nseries       {res['series']:.12f} (+- {res['series_bound']:.1e})")
    print(f"simulation   {p:.5f} (+- {se:.5f}, families still going at {args.cap:g})")
    for name, v in CHI_CANDIDATES.items():
        print(f"{name:<13}{v:.12f}   gap to series {abs(v - res['series']):.2e}")
    print(f"series picks {res['series_match']}, simulation picks {res['mc_match']}")


if __name__ == "__main__":
    main()
