"""Pathwise gap between the series solution and the Picard oracle, alpha = 0.

For constant sigma and s = sigma^2 t x, the k-th chaos components of the two
corner values on an n x n grid have

    Var(oracle_k)          = s^k C(n,k)^2 / n^(2k)
    Var(series_k)          = s^k / (k!)^3
    Cov(oracle_k, series_k) = s^k C(n,k)^2 / n^(2k) / k!

so the mean-square gap is sum_k s^k [c_n(k) (1 - 2/k!) + 1/(k!)^3] with
c_n(k) = C(n,k)^2 / n^(2k).  As n grows this tends to sum_k s^k (k! - 1)/(k!)^3,
which is nonzero from k = 2 on: refinement does not drive the gap to zero.

Usage: python scripts/series_gap.py [--sigma 0.5] [--paths 4000] [--seed 0]
"""

import argparse
import math

from wnchaos.spde import Field, SpdeProblem, compare_series_vs_oracle


def exact_ms_gap(s: float, n: int, N: int = 12) -> float:
    total = 0.0
    for k in range(1, min(n, N) + 1):
        c = math.comb(n, k) ** 2 / n ** (2 * k)
        f = math.factorial(k)
        total += s ** k * (c * (1 - 2 / f) + 1 / f ** 3)
    # oracle chaos components beyond the series truncation
    for k in range(N + 1, n + 1):
        total += s ** k * (math.comb(n, k) ** 2 / n ** (2 * k))
    return total


def limit_ms_gap(s: float, K: int = 40) -> float:
    return sum(s ** k * (math.factorial(k) - 1) / math.factorial(k) ** 3 for k in range(2, K))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--paths", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    s = args.sigma ** 2
    grids = (16, 32, 64, 128, 256)
    p = SpdeProblem(alpha=Field("const", 0.0), sigma=Field("const", args.sigma))
    rows = compare_series_vs_oracle(p, args.paths, args.seed, grids)
    print(f"sigma={args.sigma}  paths={args.paths}  limit rms gap={math.sqrt(limit_ms_gap(s)):.5f}")
    print(f"{'n':>5} {'rms exact':>10} {'rms MC':>10} {'mean gap':>10} {'se':>9}")
    for r in rows:
        print(f"{r.n:>5} {math.sqrt(exact_ms_gap(s, r.n)):>10.5f} {r.rms_gap:>10.5f} "
              f"{r.mean_gap:>+10.5f} {r.se_gap:>9.5f}")


if __name__ == "__main__":
    main()
