"""Which closed form describes E[Y(t,x)]?  Monte Carlo over the Picard oracle.

Candidates at the corner (1, 1) with constant alpha and sigma:
  term by term:   sum_n A^n / (n!)^2
  with ||sigma||: sum_n (||sigma|| A)^n / (n!)^2
The oracle is refined to show that its grid bias is small next to the gap
between the two candidates.

Usage: python scripts/mean_verdict.py [--alpha 0.5] [--sigma 0.5] [--paths 100000]
"""

import argparse
import math

from wnchaos.spde import Field, SpdeProblem, mean_solution, sigma_norm, spde_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for n in (16, 32, 64):
        p = SpdeProblem(alpha=Field("const", args.alpha), sigma=Field("const", args.sigma),
                        nt=n, nx=n)
        row = spde_table(p, args.paths, args.seed, nodes=[(n, n)])[0]
        A = args.alpha
        tbt = mean_solution(p, 1.0, 1.0)
        alt = sum((sigma_norm(p, 1.0, 1.0) * A) ** k / math.factorial(k) ** 2 for k in range(p.N + 1))
        # the discrete oracle mean is known exactly: sum_k (A/n^2)^k C(n,k)^2
        grid_mean = sum((A / n / n) ** k * math.comb(n, k) ** 2 for k in range(n + 1))
        print(f"n={n:>3}: oracle {row.mean_oracle:.4f} +- {row.se_oracle:.4f} "
              f"(grid mean {grid_mean:.4f}) | term-by-term {tbt:.4f} "
              f"z={(row.mean_oracle - tbt) / row.se_oracle:+.1f} | "
              f"with ||sigma|| {alt:.4f} z={(row.mean_oracle - alt) / row.se_oracle:+.1f}")


if __name__ == "__main__":
    main()
