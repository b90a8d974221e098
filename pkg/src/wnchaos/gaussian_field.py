"""Sampling the white-noise space: Gaussian coordinates, Brownian sheets, Wiener integrals.

A sample omega is represented by its first J coordinates theta_i = <omega, eta_i>,
which are i.i.d. standard normal.  Two constructions of the Brownian sheet are
provided and are meant to be compared with each other:

* ``sheet_by_expansion``: B(x) = sum_j (int_[0,x] eta_j) theta_j, truncated at J;
* ``sheet_from_grid``: cumulative sums of independent cell increments.

Only the nonnegative orthant is supported.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import DomainError
from .hermite import rectangle_coefficients, xi_integrals

__all__ = [
    "OmegaSample",
    "NoiseGrid2D",
    "sample_omega",
    "sample_theta_batch",
    "wiener_integral",
    "sheet_by_expansion",
    "parseval_partial_sum",
    "noise_grid",
    "noise_grid_batch",
    "coarsen",
    "sheet_from_grid",
    "sheet_surface",
    "white_noise_pairing",
    "brownian_increments",
    "brownian_increments_batch",
    "DEFAULT_J",
]

DEFAULT_J = {1: 2000, 2: 3000}

# stream salts so that omega samples, grids and 1-D paths with the same
# (seed, stream) never share raw bits
_SALT_OMEGA = 0
_SALT_GRID = 1
_SALT_PATH = 2


def _salted(seed: int, salt: int) -> int:
    return (int(seed) << 2) | salt


@dataclass(frozen=True)
class OmegaSample:
    """First J Gaussian coordinates of one sample omega."""

    theta: np.ndarray
    seed: int | None = None
    stream: int | None = None

    @property
    def J(self) -> int:
        return int(self.theta.shape[0])

    def shifted(self, g, eps: float) -> "OmegaSample":
        """omega + eps*gamma for gamma = sum_i g_i eta_i (only theta moves)."""
        g = np.asarray(g, dtype=float)
        if g.shape[0] > self.J:
            raise DomainError("direction uses more coordinates than the sample holds")
        theta = self.theta.copy()
        theta[: g.shape[0]] += eps * g
        return OmegaSample(theta, self.seed, self.stream)


def sample_omega(seed: int, stream: int, J: int) -> OmegaSample:
    if J < 1:
        raise DomainError(f"truncation J must be >= 1, got {J}")
    theta = rng.normals(_salted(seed, _SALT_OMEGA), stream, J)
    return OmegaSample(theta, seed, stream)


def sample_theta_batch(seed: int, streams, J: int) -> np.ndarray:
    """Stacked theta vectors, shape ``(len(streams), J)``; row i is ``sample_omega(seed, streams[i], J).theta``."""
    if J < 1:
        raise DomainError(f"truncation J must be >= 1, got {J}")
    return rng.normals_batch(_salted(seed, _SALT_OMEGA), streams, J)


def wiener_integral(a, omega) -> float | np.ndarray:
    """int phi dB = <omega, phi> = sum_j a_j theta_j for phi = sum_j a_j eta_j."""
    a = np.asarray(a, dtype=float)
    theta = np.asarray(getattr(omega, "theta", omega), dtype=float)
    if a.shape[0] > theta.shape[-1]:
        raise DomainError(
            f"phi has {a.shape[0]} coefficients, sample has {theta.shape[-1]} coordinates"
        )
    out = theta[..., : a.shape[0]] @ a
    return out if np.ndim(out) else float(out)


def sheet_by_expansion(x, omega, J: int | None = None):
    """B(x, omega) = sum_{j<=J} (int_[0,x] eta_j) theta_j.

    ``J`` defaults to all coordinates carried by ``omega``.  A 2-D theta array
    evaluates a batch of samples.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = np.asarray(getattr(omega, "theta", omega), dtype=float)
    J = theta.shape[-1] if J is None else int(J)
    if J > theta.shape[-1]:
        raise DomainError("J exceeds the number of sampled coordinates")
    if np.any(x == 0.0):
        return np.zeros(theta.shape[:-1]) if theta.ndim > 1 else 0.0
    coeffs = rectangle_coefficients(x, J)
    out = theta[..., :J] @ coeffs
    return out if np.ndim(out) else float(out)


def parseval_partial_sum(s: float, t: float, J: int) -> float:
    """sum_{j<=J} (int_0^s xi_j)(int_0^t xi_j), which tends to min(s, t)."""
    return float(np.dot(xi_integrals(J, s), xi_integrals(J, t)))


# ---------------------------------------------------------------------------
# Grid realization


@dataclass(frozen=True)
class NoiseGrid2D:
    """Independent N(0, dt*dx) increments on an nt x nx grid of cells.

    Cell (i, j) covers [i*dt, (i+1)*dt] x [j*dx, (j+1)*dx]; axis 0 is time.
    """

    dB: np.ndarray
    dt: float
    dx: float
    seed: int | None = None
    stream: int | None = None
    nt: int = field(init=False)
    nx: int = field(init=False)

    def __post_init__(self):
        dB = np.asarray(self.dB, dtype=float)
        if dB.ndim != 2:
            raise DomainError("NoiseGrid2D increments must be a 2-D array")
        object.__setattr__(self, "dB", dB)
        object.__setattr__(self, "nt", dB.shape[0])
        object.__setattr__(self, "nx", dB.shape[1])

    @property
    def T(self) -> float:
        return self.nt * self.dt

    @property
    def X(self) -> float:
        return self.nx * self.dx

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nt", "nx", "dt", "dx", "seed", "stream"])
        w.writerow([self.nt, self.nx, repr(self.dt), repr(self.dx),
                    "" if self.seed is None else self.seed,
                    "" if self.stream is None else self.stream])
        for row in self.dB:
            w.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "NoiseGrid2D":
        rows = list(csv.reader(io.StringIO(text)))
        if len(rows) < 2 or rows[0] != ["nt", "nx", "dt", "dx", "seed", "stream"]:
            raise DomainError("not a NoiseGrid2D CSV export")
        nt, nx = int(rows[1][0]), int(rows[1][1])
        dt, dx = float(rows[1][2]), float(rows[1][3])
        seed = int(rows[1][4]) if rows[1][4] else None
        stream = int(rows[1][5]) if rows[1][5] else None
        body = rows[2:]
        if len(body) != nt or any(len(r) != nx for r in body):
            raise DomainError(f"expected {nt} rows of {nx} increments")
        dB = np.array([[float(v) for v in r] for r in body]).reshape(nt, nx)
        return cls(dB, dt, dx, seed, stream)


def _check_grid_args(nt, nx, T, X):
    if nt < 1 or nx < 1:
        raise DomainError(f"grid needs nt, nx >= 1, got {nt}, {nx}")
    if T <= 0 or X <= 0:
        raise DomainError(f"grid extents must be positive, got T={T}, X={X}")


def noise_grid(seed: int, stream: int, nt: int, nx: int, T: float = 1.0,
               X: float = 1.0) -> NoiseGrid2D:
    _check_grid_args(nt, nx, T, X)
    dt, dx = T / nt, X / nx
    z = rng.normals(_salted(seed, _SALT_GRID), stream, nt * nx).reshape(nt, nx)
    return NoiseGrid2D(z * math.sqrt(dt * dx), dt, dx, seed, stream)


def noise_grid_batch(seed: int, streams, nt: int, nx: int, T: float = 1.0,
                     X: float = 1.0) -> np.ndarray:
    """Increments of many grids, shape ``(len(streams), nt, nx)``.

    Slice i equals ``noise_grid(seed, streams[i], ...).dB``.
    """
    _check_grid_args(nt, nx, T, X)
    streams = list(streams)
    z = rng.normals_batch(_salted(seed, _SALT_GRID), streams, nt * nx)
    return z.reshape(len(streams), nt, nx) * math.sqrt((T / nt) * (X / nx))


def coarsen(dB: np.ndarray, factor: int) -> np.ndarray:
    """Sum increments over factor x factor blocks (same sheet, coarser grid)."""
    *lead, nt, nx = dB.shape
    if nt % factor or nx % factor:
        raise DomainError(f"grid {nt}x{nx} is not divisible by {factor}")
    return dB.reshape(*lead, nt // factor, factor, nx // factor, factor).sum(axis=(-3, -1))


def sheet_surface(dB: np.ndarray) -> np.ndarray:
    """B at all grid nodes; shape ``(..., nt + 1, nx + 1)`` with zero first row and column."""
    dB = np.asarray(dB, dtype=float)
    *lead, nt, nx = dB.shape
    out = np.zeros((*lead, nt + 1, nx + 1))
    out[..., 1:, 1:] = dB.cumsum(axis=-2).cumsum(axis=-1)
    return out


def sheet_from_grid(g: NoiseGrid2D, i: int, j: int) -> float:
    """B(i*dt, j*dx) = sum of increments in cells i' < i, j' < j."""
    if not (0 <= i <= g.nt and 0 <= j <= g.nx):
        raise DomainError(f"corner ({i}, {j}) outside the {g.nt}x{g.nx} grid")
    return float(g.dB[:i, :j].sum())


def white_noise_pairing(phi, g: NoiseGrid2D) -> float:
    """Discrete <W, phi> = sum_cells phi(cell centre) * dB_cell."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != g.dB.shape:
        raise DomainError(f"phi has shape {phi.shape}, grid has {g.dB.shape}")
    return float(np.sum(phi * g.dB))


# ---------------------------------------------------------------------------
# One-parameter paths


def brownian_increments(seed: int, stream: int, steps: int, T: float = 1.0) -> np.ndarray:
    if steps < 1:
        raise DomainError(f"need at least one step, got {steps}")
    if T < 0:
        raise DomainError(f"horizon must be >= 0, got {T}")
    return rng.normals(_salted(seed, _SALT_PATH), stream, steps) * math.sqrt(T / steps)


def brownian_increments_batch(seed: int, streams, steps: int, T: float = 1.0) -> np.ndarray:
    if steps < 1:
        raise DomainError(f"need at least one step, got {steps}")
    if T < 0:
        raise DomainError(f"horizon must be >= 0, got {T}")
    return rng.normals_batch(_salted(seed, _SALT_PATH), streams, steps) * math.sqrt(T / steps)
