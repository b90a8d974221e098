"""Truncation error of the Brownian-sheet expansion, d = 1 and d = 2.

Prints 1 - sum_{j<=J} (int_[0,x] eta_j)^2 at x = 1 (d = 1) and x = (1, 1)
(d = 2), and the d = 1 cross term at (0.5, 1.0).  The d = 2 curve decays
roughly like J^(-1/2), which is why moderate J leaves a visible bias.

Usage: python scripts/parseval_curve.py
"""

import numpy as np

from wnchaos.gaussian_field import parseval_partial_sum
from wnchaos.hermite import rectangle_coefficients


def main():
    print(f"{'J':>6} {'d=1 var defect':>15} {'d=1 cross err':>14} {'d=2 var defect':>15}")
    for J in (100, 250, 500, 1000, 2000, 3000, 6000, 10000):
        c1 = rectangle_coefficients((1.0,), J)
        c2 = rectangle_coefficients((1.0, 1.0), J)
        cross = abs(parseval_partial_sum(0.5, 1.0, J) - 0.5)
        print(f"{J:>6} {1 - c1 @ c1:>15.3e} {cross:>14.3e} {1 - float(np.dot(c2, c2)):>15.3e}")


if __name__ == "__main__":
    main()
