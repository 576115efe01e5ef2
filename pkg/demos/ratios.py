"""Running sex ratios for a few stopping rules.

Every rule here stops on a fair coin, so the pooled girls/boys ratio still
tends to 1.  The averaged per-family ratios do not, and their limits are
known in closed form for the one-boy rules.

    python demos/ratios.py --n 200000
"""
import argparse

import numpy as np

from sexratio import limits, walk
from sexratio.exact import ExactConstants
from sexratio.strategies import PBoys, PBoysMore, SqrtBoundary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="families per rule")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    k = ExactConstants()
    # level rules run on the leap engine, so a huge cap costs nothing and
    # dropping censored families does not bias R_n
    rules = [(PBoys(1), {"barF": k.first_boy_fraction}, walk.DEFAULT_CAP),
             (PBoysMore(1), {"barF": k.one_more_fraction, "barR": k.one_more_ratio},
              limits.LIMIT_CAP),
             (PBoys(2), {}, walk.DEFAULT_CAP),
             (SqrtBoundary(1.0), {}, limits.SQRT_CAP)]
    print(f"{'rule':<22}{'censored':>9}{'R_n':>10}{'barF_n':>10}{'barR_n':>10}   limits")
    for spec, known, cap in rules:
        batch = walk.simulate_batch(spec, args.n, args.seed, cap=cap)
        s = limits.ratio_series(batch).at(args.n - batch.n_censored)
        lim = ", ".join(f"{name} -> {v:.5f}" for name, v in known.items())
        print(f"{str(spec):<22}{batch.n_censored:>9}{s['R']:>10.5f}{s['barF']:>10.5f}"
              f"{s['barR']:>10.5f}   {lim}")

    # how fast R_n approaches 1 under the one-boy-more rule
    # n(1 - R_n)/2 settles into a chi-squared(1) law rather than shrinking
    batch = walk.simulate_batch(PBoysMore(1), args.n, args.seed + 1, cap=limits.LIMIT_CAP)
    series = limits.ratio_series(batch)
    print("\nn         |1 - R_n|   n(1 - R_n)/2")
    for n in np.geomspace(100, len(series), 5).astype(int):
        d = 1 - series.R[n - 1]
        print(f"{n:<10}{abs(d):<12.3g}{n * d / 2:.3g}")


if __name__ == "__main__":
    main()
