"""Command-line entry point: ``wnchaos {sheet,wick-demo,clark-ocone,spde}``.

Every command writes CSV preceded by ``#`` metadata lines (version, generator,
seed, effective configuration).  Output depends only on the arguments.
Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import __version__
from .errors import DomainError, NumericalFailure
from .rng import GENERATOR

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not v >= 0 or math.isinf(v):
        raise argparse.ArgumentTypeError(f"expected a finite number >= 0, got {text}")
    return v


def _header(command: str, config: dict) -> str:
    lines = [f"# wnchaos {__version__}", f"# command: {command}", f"# generator: {GENERATOR}"]
    if "seed" in config:
        lines.append(f"# seed: {config['seed']}")
    body = "; ".join(f"{k}={v}" for k, v in config.items())
    lines.append(f"# config: {body}")
    return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _table(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------


SHEET_POINTS = {
    1: [((0.5,), (1.0,)), ((1.0,), (1.0,)), ((0.25,), (0.75,))],
    2: [((1.0, 1.0), (0.5, 1.0)), ((1.0, 1.0), (1.0, 1.0)), ((0.5, 0.5), (1.0, 0.5)),
        ((0.5, 1.0), (1.0, 0.5))],
}


def _cov_stats(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    prod = (a - a.mean()) * (b - b.mean())
    n = a.shape[0]
    cov = float(prod.sum() / (n - 1)) if n > 1 else math.nan
    se = float(prod.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return cov, se


def _pt(x) -> str:
    return " ".join(repr(float(v)) for v in x)


def cmd_sheet(args) -> str:
    from .gaussian_field import (
        brownian_increments_batch,
        noise_grid_batch,
        rectangle_coefficients,
        sample_theta_batch,
    )

    d, J, grid, paths = args.d, args.J, args.grid, args.paths
    points = SHEET_POINTS[d]
    corners = sorted({p for pair in points for p in pair})
    rows = []
    # expansion
    coeffs = {c: rectangle_coefficients(c, J) for c in corners}
    acc = {c: [] for c in corners}
    chunk = max(1, (1 << 22) // J)
    for start in range(0, paths, chunk):
        theta = sample_theta_batch(args.seed, range(start, min(paths, start + chunk)), J)
        for c in corners:
            acc[c].append(theta @ coeffs[c])
    vals = {c: np.concatenate(v) for c, v in acc.items()}
    for x, y in points:
        cov, se = _cov_stats(vals[x], vals[y])
        rows.append(["expansion", _pt(x), _pt(y), cov, float(np.prod(np.minimum(x, y))),
                     float(coeffs[x] @ coeffs[y]), se])
    if grid:
        if any(abs(v * grid - round(v * grid)) > 1e-12 for c in corners for v in c):
            raise UsageError(f"--grid {grid} does not put every check point on a node")
        if d == 1:
            dB = brownian_increments_batch(args.seed, range(paths), grid, 1.0)
            path = np.concatenate([np.zeros((paths, 1)), dB.cumsum(axis=1)], axis=1)
            gvals = {c: path[:, int(round(c[0] * grid))] for c in corners}
        else:
            acc = {c: [] for c in corners}
            chunk = max(1, (1 << 22) // (grid * grid))
            for start in range(0, paths, chunk):
                dB = noise_grid_batch(args.seed, range(start, min(paths, start + chunk)),
                                      grid, grid, 1.0, 1.0)
                surf = dB.cumsum(axis=1).cumsum(axis=2)
                for c in corners:
                    i, j = int(round(c[0] * grid)), int(round(c[1] * grid))
                    acc[c].append(surf[:, i - 1, j - 1] if i and j else np.zeros(dB.shape[0]))
            gvals = {c: np.concatenate(v) for c, v in acc.items()}
        for x, y in points:
            cov, se = _cov_stats(gvals[x], gvals[y])
            rows.append(["grid", _pt(x), _pt(y), cov, float(np.prod(np.minimum(x, y))), "", se])
    config = {"d": d, "J": J, "grid": grid, "paths": paths, "seed": args.seed}
    return _header("sheet", config) + _table(
        ["method", "x", "y", "cov_empirical", "theory", "theory_truncated", "se"], rows)


def cmd_wick_demo(args) -> str:
    from .gaussian_field import brownian_increments
    from .ito import wick_ito_demo

    steps = sorted(set(args.steps))
    finest = steps[-1]
    if any(finest % s for s in steps):
        raise UsageError("every --steps value must divide the largest one")
    dB_fine = brownian_increments(args.seed, 0, finest, args.T)
    rows = []
    for s in steps:
        dB = dB_fine.reshape(s, finest // s).sum(axis=1)
        rep = wick_ito_demo(args.T, dB=dB)
        rows.append([s, "ito", rep.ito, 0.0])
        rows.append([s, "ito-formula", rep.ito_formula, rep.gap_ito_formula])
        rows.append([s, "wick", rep.wick, rep.gap_ito_wick])
    config = {"T": args.T, "steps": " ".join(map(str, steps)), "seed": args.seed}
    return _header("wick-demo", config) + _table(["steps", "quantity", "value", "gap_vs_ito"], rows)


def cmd_clark_ocone(args) -> str:
    from .malliavin import CLARK_OCONE_CASES, clark_ocone_table, rows_to_csv

    if args.case not in CLARK_OCONE_CASES:
        raise UsageError(f"unknown case {args.case!r}; choose from {', '.join(CLARK_OCONE_CASES)}")
    rows = clark_ocone_table(args.case, args.steps, args.paths, args.seed, args.T)
    config = {"case": args.case, "steps": " ".join(map(str, sorted(set(args.steps)))),
              "paths": args.paths, "T": args.T, "seed": args.seed}
    return _header("clark-ocone", config) + rows_to_csv(rows)


def cmd_spde(args) -> str:
    from .spde import ConfigError, parse_config, rows_to_csv, spde_table

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}")
    try:
        problem, settings, effective = parse_config(text)
    except ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}")
    rows = spde_table(problem, settings.paths, settings.seed)
    return _header("spde", effective) + rows_to_csv(rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wnchaos", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wnchaos {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sheet", help="Brownian-sheet covariance check")
    p.add_argument("--d", type=int, choices=(1, 2), default=1)
    p.add_argument("--J", type=_positive_int, default=None,
                   help="expansion truncation (default 2000 for d=1, 3000 for d=2)")
    p.add_argument("--grid", type=_nonneg_int, default=0,
                   help="also sample the grid construction at this resolution")
    p.add_argument("--paths", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sheet)

    p = sub.add_parser("wick-demo", help="Ito integral vs Ito formula vs Wick square")
    p.add_argument("--T", type=_nonneg_float, default=1.0)
    p.add_argument("--steps", type=_positive_int, nargs="+", default=[1024])
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_wick_demo)

    p = sub.add_parser("clark-ocone", help="Clark-Ocone reconstruction errors")
    p.add_argument("--case", required=True)
    p.add_argument("--steps", type=_positive_int, nargs="+", default=[1024])
    p.add_argument("--paths", type=_positive_int, default=10_000)
    p.add_argument("--T", type=_nonneg_float, default=1.0)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_clark_ocone)

    p = sub.add_parser("spde", help="series solution vs Picard oracle")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_spde)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "J", "absent") is None:
        from .gaussian_field import DEFAULT_J

        args.J = DEFAULT_J[args.d]
    try:
        text = args.func(args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"wnchaos {args.command}: error: {exc}\n")
    except DomainError as exc:
        parser.exit(EXIT_USAGE, f"wnchaos {args.command}: error: {exc}\n")
    except (NumericalFailure, OverflowError, FloatingPointError) as exc:
        parser.exit(EXIT_NUMERICAL, f"wnchaos {args.command}: numerical failure: {exc}\n")
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
