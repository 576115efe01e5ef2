"""How unlikely is a small average family?

Under the one-boy-more rule, P(n families have at most c*n girls in total)
falls like rho^n.  The exact probabilities come from convolving the girls
pmf.  A straight line fitted to -log P_n over small n overshoots -log rho,
because of a slowly varying (1/2) log n term; adding that column fixes it.

    python demos/large_deviations.py
"""
import argparse
import math

from sexratio import ldp


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, default=1.0)
    args = ap.parse_args()

    target = -math.log(ldp.rho(1, args.c))
    print(f"rho(1, {args.c:g}) = {ldp.rho(1, args.c):.8f}   -log rho = {target:.6f}")
    print(f"saddle z = {ldp.saddle_z(1, args.c):.6f}\n")
    print("grid            plain slope   rel err    with log n   rel err")
    for grid in ([64, 128, 256, 512], [256, 512, 1024, 2048], [1024, 2048, 4096, 8192]):
        fit = ldp.rate_fit(1, args.c, grid)
        print(f"{grid[0]:>5}..{grid[-1]:<8}{fit.fitted_rate:>12.6f}{(fit.fitted_rate / target - 1):>10.2%}"
              f"{fit.rate_with_log:>13.6f}{(fit.rate_with_log / target - 1):>10.3%}")


if __name__ == "__main__":
    main()
