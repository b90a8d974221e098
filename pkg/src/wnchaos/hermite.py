"""Hermite polynomials, Hermite functions and the tensor basis eta_j of L^2(R^d).

``hermite_poly`` is the probabilists' family h_n (h_2 = x^2 - 1).  The Hermite
functions ``xi_n`` (n >= 1) are the L^2(R)-orthonormal family

    xi_n(x) = pi^(-1/4) ((n-1)!)^(-1/2) exp(-x^2/2) h_{n-1}(sqrt(2) x),

evaluated with the normalized three-term recurrence so no factorial is formed.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .multiindex import enumerate_basis
from .quadrature import gauss_kronrod

__all__ = [
    "hermite_poly",
    "hermite_fn",
    "hermite_fn_all",
    "BasisIndex",
    "eta",
    "xi_integrals",
    "eta_rectangle_integral",
    "rectangle_coefficients",
]

_PI_M14 = math.pi ** -0.25


def hermite_poly(n: int, x):
    """h_n(x) by h_{k+1} = x h_k - k h_{k-1}.  Works elementwise on arrays."""
    if n < 0:
        raise DomainError(f"Hermite degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if x.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, n):
        h_prev, h = h, x * h - k * h_prev
    return h if x.ndim else float(h)


def hermite_poly_all(n_max: int, x) -> np.ndarray:
    """Array of shape ``(n_max + 1,) + x.shape`` holding h_0..h_{n_max}."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for k in range(1, n_max):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


def hermite_fn_all(n_max: int, x) -> np.ndarray:
    """xi_1..xi_{n_max} at ``x``; shape ``(n_max,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max,) + x.shape)
    if n_max == 0:
        return out
    out[0] = _PI_M14 * np.exp(-0.5 * x * x)
    if n_max >= 2:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(2, n_max):
        # out[n] is xi_{n+1}
        out[n] = x * math.sqrt(2.0 / n) * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def hermite_fn(n: int, x):
    """xi_n(x), n >= 1."""
    if n < 1:
        raise DomainError(f"Hermite functions are indexed from 1, got {n}")
    v = hermite_fn_all(n, x)[n - 1]
    return v if np.ndim(v) else float(v)


@dataclass(frozen=True)
class BasisIndex:
    """Linear index j of the tensor basis function eta_j on R^d."""

    d: int
    j: int
    delta: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", enumerate_basis(self.d, self.j))


def eta(b: BasisIndex, u) -> float:
    """eta_j(u) = prod_k xi_{delta_k}(u_k)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape[0] != b.d:
        raise DomainError(f"point has {u.shape[0]} coordinates, basis has d={b.d}")
    out = 1.0
    for k, n in enumerate(b.delta):
        out *= hermite_fn(n, u[k])
    return out


# ---------------------------------------------------------------------------
# Integrals of Hermite functions over [0, x].

_cache: dict[float, np.ndarray] = {}
_cache_lock = threading.Lock()

QUAD_TOL = 1e-10


def _compute_xi_integrals(n_max: int, x: float) -> np.ndarray:
    # enough initial panels to resolve the oscillation of xi_{n_max}
    # (local wavenumber ~ sqrt(2 n)) before the error estimate is trusted
    panels = max(1, int(math.ceil(x * math.sqrt(2.0 * n_max + 1.0) / 2.0)))
    vals, _ = gauss_kronrod(lambda t: hermite_fn_all(n_max, t), 0.0, x,
                            tol=QUAD_TOL, initial_panels=panels)
    return vals


def xi_integrals(n_max: int, x: float) -> np.ndarray:
    """``[int_0^x xi_n(t) dt for n = 1..n_max]``, cached per endpoint."""
    x = float(x)
    if x < 0:
        raise DomainError(f"integration endpoint must be >= 0, got {x}")
    if n_max < 1:
        return np.zeros(0)
    if x == 0.0:
        return np.zeros(n_max)
    with _cache_lock:
        cached = _cache.get(x)
    if cached is not None and cached.size >= n_max:
        return cached[:n_max]
    vals = _compute_xi_integrals(n_max, x)
    with _cache_lock:
        current = _cache.get(x)
        if current is None or current.size < vals.size:
            _cache[x] = vals
    return vals


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()


def eta_rectangle_integral(b: BasisIndex, x) -> float:
    """int over [0, x_1] x ... x [0, x_d] of eta_j, as a product of 1-D integrals."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[0] != b.d:
        raise DomainError(f"corner has {x.shape[0]} coordinates, basis has d={b.d}")
    if np.any(x < 0):
        raise DomainError("rectangle corners must lie in the nonnegative orthant")
    out = 1.0
    for k, n in enumerate(b.delta):
        out *= xi_integrals(n, x[k])[n - 1]
    return out


def rectangle_coefficients(x, J: int) -> np.ndarray:
    """Coefficients (chi_[0,x], eta_j) for j = 1..J, vectorized over j."""
    from .multiindex import basis_block

    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.shape[0]
    if np.any(x < 0):
        raise DomainError("rectangle corners must lie in the nonnegative orthant")
    deltas = np.array(basis_block(d, J), dtype=np.int64).reshape(J, d)
    out = np.ones(J)
    for k in range(d):
        n_max = int(deltas[:, k].max()) if J else 0
        ints = xi_integrals(n_max, x[k])
        if ints.size == 0:
            out[:] = 0.0
            continue
        out *= ints[deltas[:, k] - 1]
    return out
