"""Spectral gap of the averaged random walk on the cycles Z/n.

The gap -2 log ||pi(mu_bar)|| on functions orthogonal to constants is
printed with n^2 * gap, which tends to 4 pi^2 because
||pi(mu_bar)|| = 1 / (2 - cos(2 pi / n)) gives gap ~ (2 pi / n)^2.
"""

import argparse
import math

from fentropy.finset import INTEGER, measure
from fentropy.spectral import cyclic_gap_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-log2", type=int, default=10)
    ap.add_argument("--trunc", type=int, default=60)
    args = ap.parse_args()

    mu = measure([(1, 0.5), (-1, 0.5)], INTEGER)
    ns = [2**k for k in range(1, args.max_log2 + 1)]
    print(f"{'n':>6} {'norm':>14} {'gap':>12} {'n^2 gap':>10}")
    for row in cyclic_gap_curve(ns, mu, args.trunc):
        print(f"{row.n:>6} {row.norm:>14.10f} {row.gap:>12.4e} {row.n**2 * row.gap:>10.4f}")
    print(f"limit of n^2 gap: 4 pi^2 = {4 * math.pi**2:.4f}")


if __name__ == "__main__":
    main()
