"""Entropy of two families of properly nonsingular Z-like actions as p approaches 1/2.

Prints, for p = 1/2 + 2^-k, the exact Bernoulli shift entropy for delta_{1}
and the odometer skew-product entropy for delta_1 together with their ratio
to 8(p - 1/2)^2, which shows the quadratic decay.
"""

import argparse

from fentropy.bernoulli import exact_entropy_finset_action, phi
from fentropy.cocycle import OdometerCocycle, OdometerSystem, skew_entropy_exact
from fentropy.finset import FINSET, INTEGER, FinSet, delta


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=16)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    finset_mu = delta(FinSet([1]), FINSET)
    base = skew_entropy_exact(delta(1, INTEGER), OdometerCocycle(), OdometerSystem(), 0.75, args.samples, args.seed)
    mean_flips = base.mean / phi(0.75)
    print(f"mean carry length E|c(1,x)| = {mean_flips:.5f}")
    print(f"{'k':>3} {'p':>12} {'bernoulli':>12} {'skew':>12} {'phi/8eps^2':>11}")
    for k in range(2, args.kmax + 1):
        p = 0.5 + 2.0**-k
        h = exact_entropy_finset_action(finset_mu, p)
        print(f"{k:>3} {p:>12.9f} {h:>12.4e} {mean_flips * phi(p):>12.4e} {phi(p) / (8 * 4.0**-k):>11.6f}")


if __name__ == "__main__":
    main()
