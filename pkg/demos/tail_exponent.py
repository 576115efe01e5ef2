"""Tail exponent of the square-root rule.

Stop once boys lead by c*sqrt(children).  P(tau > k) decays like k^-kappa(c),
with kappa from the first zero of a parabolic cylinder function.  Prints the
solver's value next to a Monte Carlo log-log regression.

    python demos/tail_exponent.py --families 20000
"""
import argparse

from sexratio import kappa as K


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--families", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    print("c      kappa(c)   residual")
    for r in K.kappa_grid([0.01, 0.25, 0.5, 1.0, 2.0, 3.0, 6.0]):
        print(f"{r.c:<7g}{r.kappa:<11.4g}{r.residual:.1e}")

    print("\nc      solver     Monte Carlo   95% CI")
    for c in (0.5, 1.0, 2.0):
        fit = K.tail_exponent_mc(c, families=args.families, seed=args.seed, boot=100,
                                 min_tail=20)
        lo, hi = fit.ci
        print(f"{c:<7g}{K.kappa(c):<11.5f}{fit.kappa_hat:<14.5f}[{lo:.4f}, {hi:.4f}]")


if __name__ == "__main__":
    main()
