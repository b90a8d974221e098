"""Space-time population SPDE d^2Y/dtdx = alpha Y + sigma Y W(t, x), Y = y0 on the axes.

Two independent evaluations of the solution at a grid node (t, x):

* ``series_solution``: the closed-form double series in
  A = int int alpha,  ||sigma|| (L^2 norm over [0,t]x[0,x]) and
  G = int int sigma dB / ||sigma||, truncated at order N;
* ``picard_oracle``: forward sweep of the discrete Volterra equation
  Y_ij = y0 + sum_{i'<i, j'<j} (alpha dt dx + sigma dB) Y_{i'j'}.

Both see the same midpoint-rule coefficients and the same increments.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .chaos import ChaosExpansion, constant, evaluate, expectation, wick_product
from .errors import DomainError
from .gaussian_field import NoiseGrid2D, coarsen, noise_grid_batch
from .hermite import hermite_fn_all, hermite_poly_all
from .multiindex import MultiIndex, basis_block

__all__ = [
    "Field",
    "SpdeProblem",
    "SeriesSolution",
    "alpha_integral",
    "sigma_norm",
    "series_value",
    "series_solution",
    "mean_solution",
    "picard_oracle",
    "picard_nodes",
    "RefinementRow",
    "compare_series_vs_oracle",
    "SpdeRow",
    "spde_table",
    "sigma_basis_coefficients",
    "wick_skorohod_solution",
    "wick_skorohod_mean",
    "ConfigError",
    "parse_config",
    "rows_to_csv",
]


# ---------------------------------------------------------------------------
# Coefficient fields


@dataclass(frozen=True)
class Field:
    """Named coefficient family: const:c, linear_t:c, linear_x:c or product:c."""

    kind: str
    c: float

    KINDS = ("const", "linear_t", "linear_x", "product")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown field family {self.kind!r}; choose from {self.KINDS}")

    def __call__(self, t, x):
        t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
        if self.kind == "const":
            return np.full(np.broadcast(t, x).shape, self.c)
        if self.kind == "linear_t":
            return self.c * t + 0.0 * x
        if self.kind == "linear_x":
            return self.c * x + 0.0 * t
        return self.c * t * x

    @property
    def is_zero(self) -> bool:
        return self.c == 0.0

    @classmethod
    def parse(cls, text: str) -> "Field":
        text = text.strip()
        if ":" in text:
            kind, _, value = text.partition(":")
            return cls(kind.strip(), float(value))
        return cls("const", float(text))

    def __str__(self) -> str:
        return f"{self.kind}:{self.c!r}"


@dataclass(frozen=True)
class SpdeProblem:
    alpha: Callable = field(default_factory=lambda: Field("const", 0.0))
    sigma: Callable = field(default_factory=lambda: Field("const", 0.0))
    y0: float | ChaosExpansion = 1.0
    T: float = 1.0
    X: float = 1.0
    nt: int = 64
    nx: int = 64
    N: int = 12

    def __post_init__(self):
        if not (self.T > 0 and self.X > 0):
            raise DomainError(f"domain extents must be positive, got T={self.T}, X={self.X}")
        if self.nt < 1 or self.nx < 1:
            raise DomainError(f"grid resolution must be >= 1, got {self.nt}x{self.nx}")
        if self.N < 0:
            raise DomainError(f"series order must be >= 0, got {self.N}")

    @property
    def dt(self) -> float:
        return self.T / self.nt

    @property
    def dx(self) -> float:
        return self.X / self.nx

    def refined(self, nt: int, nx: int | None = None) -> "SpdeProblem":
        return replace(self, nt=nt, nx=nt if nx is None else nx)

    def cell_values(self, f: Callable) -> np.ndarray:
        """Midpoint samples of f on the nt x nx cells."""
        tc = (np.arange(self.nt) + 0.5) * self.dt
        xc = (np.arange(self.nx) + 0.5) * self.dx
        return np.broadcast_to(np.asarray(f(tc[:, None], xc[None, :]), dtype=float),
                               (self.nt, self.nx)).copy()

    def node_index(self, t: float, x: float) -> tuple[int, int]:
        i, j = t / self.dt, x / self.dx
        ii, jj = int(round(i)), int(round(j))
        if abs(i - ii) > 1e-9 * max(1, ii) or abs(j - jj) > 1e-9 * max(1, jj):
            raise DomainError(f"({t}, {x}) is not a node of the {self.nt}x{self.nx} grid")
        if not (0 <= ii <= self.nt and 0 <= jj <= self.nx):
            raise DomainError(f"({t}, {x}) lies outside [0,{self.T}]x[0,{self.X}]")
        return ii, jj

    def y0_scalar(self) -> float:
        y0 = self.y0
        if isinstance(y0, ChaosExpansion):
            if any(a for a in y0.terms):
                raise DomainError("this evaluation needs a deterministic y0")
            return expectation(y0)
        return float(y0)


# ---------------------------------------------------------------------------
# Series solution


def alpha_integral(problem: SpdeProblem, t: float, x: float) -> float:
    i, j = problem.node_index(t, x)
    a = problem.cell_values(problem.alpha)
    return float(a[:i, :j].sum() * problem.dt * problem.dx)


def sigma_norm(problem: SpdeProblem, t: float, x: float) -> float:
    """||sigma|| over [0,t]x[0,x], midpoint rule on the problem grid."""
    i, j = problem.node_index(t, x)
    s = problem.cell_values(problem.sigma)
    return math.sqrt(float((s[:i, :j] ** 2).sum() * problem.dt * problem.dx))


def _series_weights(A: float, N: int) -> np.ndarray:
    """w[n, k] = A^(n-k) / (n! k! (n-k)!) for 0 <= k <= n <= N."""
    w = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        for k in range(n + 1):
            w[n, k] = A ** (n - k) / (math.factorial(n) * math.factorial(k)
                                      * math.factorial(n - k))
    return w


def series_value(A: float, s_norm: float, G, N: int, y0: float = 1.0):
    """Truncated double series; returns ``(value, last_increment)``, vectorized over G."""
    G = np.asarray(G, dtype=float)
    w = _series_weights(A, N)
    if s_norm == 0.0:
        # only the k = 0 terms survive
        per_n = np.broadcast_to(w[:, 0], G.shape + (N + 1,))
    else:
        h = hermite_poly_all(N, G)                                  # (N+1,) + G.shape
        powers = s_norm ** np.arange(N + 1)
        hk = np.moveaxis(h, 0, -1) * powers                         # G.shape + (N+1,)
        per_n = hk @ w.T                                            # G.shape + (N+1,)
    value = y0 * per_n.sum(axis=-1)
    last = np.abs(y0 * per_n[..., N])
    if value.ndim == 0:
        return float(value), float(last)
    return value, last


@dataclass(frozen=True)
class SeriesSolution:
    A: float
    s_norm: float
    G: float
    value: float
    last_increment: float


def series_solution(problem: SpdeProblem, g: NoiseGrid2D | np.ndarray, t: float,
                    x: float) -> SeriesSolution:
    dB = g.dB if isinstance(g, NoiseGrid2D) else np.asarray(g, dtype=float)
    if dB.shape[-2:] != (problem.nt, problem.nx):
        raise DomainError(f"noise grid {dB.shape[-2:]} does not match problem grid "
                          f"{(problem.nt, problem.nx)}")
    i, j = problem.node_index(t, x)
    A = alpha_integral(problem, t, x)
    s = sigma_norm(problem, t, x)
    if s == 0.0:
        G = 0.0
    else:
        sig = problem.cell_values(problem.sigma)
        G = float((sig[:i, :j] * dB[:i, :j]).sum()) / s
    value, last = series_value(A, s, G, problem.N, problem.y0_scalar())
    return SeriesSolution(A, s, G, value, last)


def mean_solution(problem: SpdeProblem, t: float, x: float) -> float:
    """y0 * sum_{n<=N} A^n / (n!)^2, the k = 0 part of the series."""
    A = alpha_integral(problem, t, x)
    y0 = expectation(problem.y0) if isinstance(problem.y0, ChaosExpansion) else problem.y0
    return y0 * sum(A ** n / math.factorial(n) ** 2 for n in range(problem.N + 1))


# ---------------------------------------------------------------------------
# Picard oracle


def _sweep(problem: SpdeProblem, dB: np.ndarray, keep_rows=None):
    """Forward sweep over cell rows; dB has shape (..., nt, nx).

    Returns node values for the requested node rows as ``{i: (..., nx+1)}``,
    or the full ``(..., nt+1, nx+1)`` array when ``keep_rows`` is None.
    """
    y0 = problem.y0_scalar()
    a = problem.cell_values(problem.alpha) * (problem.dt * problem.dx)
    s = problem.cell_values(problem.sigma)
    lead = dB.shape[:-2]
    nt, nx = problem.nt, problem.nx
    S = np.zeros(lead + (nx + 1,))
    full = None if keep_rows is not None else np.empty(lead + (nt + 1, nx + 1))
    kept = {}
    for i in range(nt + 1):
        Y = y0 + S
        if full is not None:
            full[..., i, :] = Y
        elif i in keep_rows:
            kept[i] = Y.copy()
        if i == nt:
            break
        Z = (a[i] + s[i] * dB[..., i, :]) * Y[..., :nx]
        S[..., 1:] += np.cumsum(Z, axis=-1)
    return full if full is not None else kept


def picard_oracle(problem: SpdeProblem, g: NoiseGrid2D | np.ndarray) -> np.ndarray:
    """Y at all grid nodes, shape ``(..., nt+1, nx+1)``."""
    dB = g.dB if isinstance(g, NoiseGrid2D) else np.asarray(g, dtype=float)
    if dB.shape[-2:] != (problem.nt, problem.nx):
        raise DomainError(f"noise grid {dB.shape[-2:]} does not match problem grid "
                          f"{(problem.nt, problem.nx)}")
    return _sweep(problem, dB)


def picard_nodes(problem: SpdeProblem, dB: np.ndarray, nodes: Sequence[tuple[int, int]]):
    """Oracle values at node indices, shape ``(..., len(nodes))``."""
    rows = _sweep(problem, dB, keep_rows={i for i, _ in nodes})
    return np.stack([rows[i][..., j] for i, j in nodes], axis=-1)


def _series_nodes(problem: SpdeProblem, dB: np.ndarray, nodes: Sequence[tuple[int, int]]):
    """Series values at node indices on a batch of grids, plus the worst last increment."""
    y0 = problem.y0_scalar()
    a = problem.cell_values(problem.alpha) * (problem.dt * problem.dx)
    s = problem.cell_values(problem.sigma)
    W = (s * dB).cumsum(axis=-2).cumsum(axis=-1)          # int sigma dB up to cell (i-1, j-1)
    s2 = (s * s * problem.dt * problem.dx).cumsum(axis=0).cumsum(axis=1)
    A_cum = a.cumsum(axis=0).cumsum(axis=1)
    out, worst = [], 0.0
    for i, j in nodes:
        if i == 0 or j == 0:
            out.append(np.full(dB.shape[:-2], y0))
            continue
        A = float(A_cum[i - 1, j - 1])
        sn = math.sqrt(float(s2[i - 1, j - 1]))
        G = W[..., i - 1, j - 1] / sn if sn > 0 else np.zeros(dB.shape[:-2])
        v, last = series_value(A, sn, G, problem.N, y0)
        out.append(np.asarray(v))
        worst = max(worst, float(np.max(last)))
    return np.stack(out, axis=-1), worst


def _chunks(paths: int, cells: int, budget: int = 1 << 22):
    size = max(1, budget // max(cells, 1))
    for start in range(0, paths, size):
        yield range(start, min(paths, start + size))


@dataclass(frozen=True)
class RefinementRow:
    n: int                 # nt = nx at this level
    paths: int
    rms_gap: float         # sqrt(mean((series - oracle)^2)) at the corner
    mean_gap: float
    se_gap: float          # standard error of mean_gap
    mean_series: float
    mean_oracle: float
    se_oracle: float
    last_increment: float


def compare_series_vs_oracle(problem: SpdeProblem, paths: int, seed: int = 0,
                             grids: Sequence[int] = (32, 64, 128, 256)) -> list[RefinementRow]:
    """Series and Picard oracle at the corner (T, X) on nested refinements of one sheet.

    The finest grid's increments are generated per stream; coarser levels are
    block sums of the same increments, so every level sees the same sheet.
    """
    grids = sorted(int(n) for n in grids)
    finest = grids[-1]
    if any(finest % n for n in grids):
        raise DomainError("every grid size must divide the finest one")
    if paths < 1:
        raise DomainError("need at least one path")
    acc = {n: {"gap": [], "ser": [], "ora": [], "last": 0.0} for n in grids}
    for streams in _chunks(paths, finest * finest):
        dB_fine = noise_grid_batch(seed, streams, finest, finest, problem.T, problem.X)
        for n in grids:
            p = problem.refined(n)
            dB = dB_fine if n == finest else coarsen(dB_fine, finest // n)
            ser, last = _series_nodes(p, dB, [(n, n)])
            ora = picard_nodes(p, dB, [(n, n)])
            a = acc[n]
            a["ser"].append(ser[..., 0])
            a["ora"].append(ora[..., 0])
            a["gap"].append(ser[..., 0] - ora[..., 0])
            a["last"] = max(a["last"], last)
    rows = []
    for n in grids:
        gap = np.concatenate(acc[n]["gap"])
        ser = np.concatenate(acc[n]["ser"])
        ora = np.concatenate(acc[n]["ora"])
        rows.append(RefinementRow(
            n, paths,
            float(np.sqrt(np.mean(gap * gap))),
            float(gap.mean()),
            float(gap.std(ddof=1) / math.sqrt(paths)) if paths > 1 else math.nan,
            float(ser.mean()),
            float(ora.mean()),
            float(ora.std(ddof=1) / math.sqrt(paths)) if paths > 1 else math.nan,
            acc[n]["last"],
        ))
    return rows


@dataclass(frozen=True)
class SpdeRow:
    t: float
    x: float
    mean_series: float
    mean_oracle: float
    se_oracle: float
    rms_path_gap: float


def default_nodes(problem: SpdeProblem) -> list[tuple[int, int]]:
    nodes = []
    for i in sorted({problem.nt // 2, problem.nt}):
        for j in sorted({problem.nx // 2, problem.nx}):
            if i and j:
                nodes.append((i, j))
    return nodes


def spde_table(problem: SpdeProblem, paths: int, seed: int = 0,
               nodes: Sequence[tuple[int, int]] | None = None) -> list[SpdeRow]:
    """Monte Carlo means of series and oracle on the problem grid, per node."""
    if paths < 1:
        raise DomainError("need at least one path")
    nodes = default_nodes(problem) if nodes is None else list(nodes)
    sers, oras = [], []
    for streams in _chunks(paths, problem.nt * problem.nx):
        dB = noise_grid_batch(seed, streams, problem.nt, problem.nx, problem.T, problem.X)
        sers.append(_series_nodes(problem, dB, nodes)[0])
        oras.append(picard_nodes(problem, dB, nodes))
    ser, ora = np.concatenate(sers), np.concatenate(oras)
    gap = ser - ora
    se = ora.std(axis=0, ddof=1) / math.sqrt(paths) if paths > 1 else np.full(len(nodes), math.nan)
    rows = []
    for m, (i, j) in enumerate(nodes):
        rows.append(SpdeRow(i * problem.dt, j * problem.dx, float(ser[:, m].mean()),
                            float(ora[:, m].mean()), float(se[m]),
                            float(np.sqrt(np.mean(gap[:, m] ** 2)))))
    return rows


def rows_to_csv(rows: Sequence[SpdeRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "mean_series", "mean_oracle", "se_oracle", "rms_path_gap"])
    for r in rows:
        w.writerow([f"{r.t:.17g}", f"{r.x:.17g}", f"{r.mean_series:.17g}",
                    f"{r.mean_oracle:.17g}", f"{r.se_oracle:.17g}", f"{r.rms_path_gap:.17g}"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Wick-Skorohod variant with random initial value


def _gauss_legendre_panels(a: float, b: float, panels: int, order: int = 16):
    z, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * z[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def sigma_basis_coefficients(sigma: Callable, t: float, x: float, J: int) -> np.ndarray:
    """(sigma * chi_[0,t]x[0,x], eta_j) for j = 1..J over the d = 2 basis."""
    deltas = np.array(basis_block(2, J), dtype=np.int64).reshape(J, 2)
    if t == 0.0 or x == 0.0 or J == 0:
        return np.zeros(J)
    n_max = int(deltas.max())
    panels = max(4, int(math.ceil(max(t, x) * math.sqrt(2.0 * n_max + 1.0))))
    ts, wt = _gauss_legendre_panels(0.0, t, panels)
    xs, wx = _gauss_legendre_panels(0.0, x, panels)
    S = np.asarray(sigma(ts[:, None], xs[None, :]), dtype=float)
    S = np.broadcast_to(S, (ts.size, xs.size))
    Xi_t = hermite_fn_all(n_max, ts) * wt          # (n_max, nodes)
    Xi_x = hermite_fn_all(n_max, xs) * wx
    M = Xi_t @ S @ Xi_x.T                          # M[a-1, b-1] = int int sigma xi_a xi_b
    return M[deltas[:, 0] - 1, deltas[:, 1] - 1]


def _scaled_hermite(n_max: int, x, var: float) -> np.ndarray:
    """rho^k h_k(x / rho) for rho^2 = var, k = 0..n_max (total at var = 0)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for k in range(1, n_max):
        out[k + 1] = x * out[k] - k * var * out[k - 1]
    return out


def wick_skorohod_solution(problem: SpdeProblem, t: float, x: float, omega,
                           J: int | None = None) -> float:
    """y0 <> S evaluated at omega, with the noise in d = 2 expansion coordinates.

    S = sum_n (1/n!) sum_k A^(n-k)/(k!(n-k)!) w^{<>k}, w = <omega, sigma chi_[0,t]x[0,x]>
    truncated to the first J basis functions.  Coordinates touched by y0 are
    handled in chaos form; the remaining part of w is independent of y0, so its
    Wick powers are ordinary products given by scaled Hermite polynomials.
    """
    theta = np.asarray(getattr(omega, "theta", omega), dtype=float)
    J = theta.shape[-1] if J is None else int(J)
    y0 = problem.y0 if isinstance(problem.y0, ChaosExpansion) else constant(problem.y0, 2)
    if y0.d != 2:
        raise DomainError("the space-time initial value must be a d = 2 expansion")
    if y0.max_basis > J:
        raise DomainError(f"y0 uses basis position {y0.max_basis} beyond J={J}")
    N = problem.N
    A = alpha_integral(problem, t, x)
    c = sigma_basis_coefficients(problem.sigma, t, x, J)
    support = sorted({pos for a in y0.terms for pos, _ in a})
    c_rest = c.copy()
    c_rest[[p - 1 for p in support]] = 0.0
    w_rest = theta[..., :J] @ c_rest
    rest_powers = _scaled_hermite(N, w_rest, float(c_rest @ c_rest))
    w_A = ChaosExpansion(2, {MultiIndex.unit(p): c[p - 1] for p in support})
    touched = [y0]
    for _ in range(N):
        touched.append(wick_product(touched[-1], w_A))
    touched_vals = [evaluate(F, theta) for F in touched]
    w = _series_weights(A, N)
    total = 0.0
    for k in range(N + 1):
        s_k = w[k:, k].sum()
        # (w_A + w_R)^{<>k} = sum_i C(k,i) w_A^{<>i} <> w_R^{<>(k-i)}
        wick_k = sum(math.comb(k, i) * touched_vals[i] * rest_powers[k - i]
                     for i in range(k + 1))
        total = total + s_k * wick_k
    return total if np.ndim(total) else float(total)


def wick_skorohod_mean(problem: SpdeProblem, t: float, x: float) -> float:
    return mean_solution(problem, t, x)


# ---------------------------------------------------------------------------
# Config files: one ``key = value`` per line, '#' starts a comment.


class ConfigError(DomainError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


_CONFIG_KEYS = {
    "alpha": Field.parse,
    "sigma": Field.parse,
    "y0": float,
    "T": float,
    "X": float,
    "nt": int,
    "nx": int,
    "N": int,
    "paths": int,
    "seed": int,
}


@dataclass(frozen=True)
class RunSettings:
    paths: int = 1000
    seed: int = 0


def parse_config(text: str) -> tuple[SpdeProblem, RunSettings, dict]:
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _CONFIG_KEYS[key](value)
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from exc
        lines[key] = lineno
    settings = RunSettings(values.pop("paths", RunSettings.paths),
                           values.pop("seed", RunSettings.seed))
    if settings.paths < 1:
        raise ConfigError("paths must be >= 1", lines.get("paths"))
    if settings.seed < 0:
        raise ConfigError("seed must be >= 0", lines.get("seed"))
    try:
        problem = SpdeProblem(**values)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    effective = {
        "alpha": str(problem.alpha), "sigma": str(problem.sigma), "y0": problem.y0,
        "T": problem.T, "X": problem.X, "nt": problem.nt, "nx": problem.nx, "N": problem.N,
        "paths": settings.paths, "seed": settings.seed,
    }
    return problem, settings, effective
