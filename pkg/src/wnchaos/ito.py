"""Discrete one- and two-parameter Ito integrals with left-endpoint evaluation.

In one parameter the integrand is evaluated at the left end of each step; in
two parameters at the lower-left corner of each cell.  That predictable choice
is what turns the Riemann sums into Ito (equivalently Wick) integrals.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

import numpy as np

from .chaos import basis_element, evaluate, wick_power
from .errors import DomainError
from .gaussian_field import NoiseGrid2D, brownian_increments, sheet_surface

__all__ = [
    "AdaptedGridProcess",
    "ito_1d",
    "ito_2d",
    "WickItoReport",
    "wick_ito_demo",
]


@dataclass(frozen=True)
class AdaptedGridProcess:
    """Integrand values aligned with the cells of a 1-D path or 2-D grid.

    ``values[..., i]`` (or ``values[..., i, j]``) is the integrand on cell i
    (i, j) and may depend only on increments strictly before it.  Build
    instances with the classmethods, which only ever sweep forward.
    """

    values: np.ndarray
    ndim: int

    def __post_init__(self):
        if self.ndim not in (1, 2):
            raise DomainError(f"only 1- and 2-parameter processes, got {self.ndim}")
        v = np.asarray(self.values, dtype=float)
        if v.ndim < self.ndim:
            raise DomainError("values have fewer axes than the parameter dimension")
        object.__setattr__(self, "values", v)

    @classmethod
    def deterministic(cls, values) -> "AdaptedGridProcess":
        v = np.asarray(values, dtype=float)
        return cls(v, v.ndim)

    @classmethod
    def path(cls, dB) -> "AdaptedGridProcess":
        """B at the left endpoint of each step: B(t_i) = sum_{i' < i} dB_{i'}."""
        dB = np.asarray(dB, dtype=float)
        left = np.zeros_like(dB)
        left[..., 1:] = np.cumsum(dB, axis=-1)[..., :-1]
        return cls(left, 1)

    @classmethod
    def sheet(cls, dB) -> "AdaptedGridProcess":
        """B at the lower-left corner of each cell."""
        surface = sheet_surface(dB)
        return cls(surface[..., :-1, :-1], 2)

    def __add__(self, other: "AdaptedGridProcess") -> "AdaptedGridProcess":
        return AdaptedGridProcess(self.values + other.values, self.ndim)

    def __mul__(self, s: float) -> "AdaptedGridProcess":
        if not isinstance(s, numbers.Real):
            return NotImplemented
        return AdaptedGridProcess(self.values * s, self.ndim)

    __rmul__ = __mul__


def _as_increments(g):
    return g.dB if isinstance(g, NoiseGrid2D) else np.asarray(g, dtype=float)


def ito_1d(Y: AdaptedGridProcess, dB):
    """sum_i Y(t_i) dB_i over the trailing axis."""
    dB = np.asarray(dB, dtype=float)
    if Y.ndim != 1:
        raise DomainError("ito_1d needs a one-parameter integrand")
    if Y.values.shape[-1] != dB.shape[-1]:
        raise DomainError(f"integrand has {Y.values.shape[-1]} steps, path has {dB.shape[-1]}")
    out = np.sum(Y.values * dB, axis=-1)
    return out if np.ndim(out) else float(out)


def ito_2d(Y: AdaptedGridProcess, g):
    """sum_ij Y_ij dB_ij over the two trailing axes."""
    dB = _as_increments(g)
    if Y.ndim != 2:
        raise DomainError("ito_2d needs a two-parameter integrand")
    if Y.values.shape[-2:] != dB.shape[-2:]:
        raise DomainError(f"integrand grid {Y.values.shape[-2:]} != noise grid {dB.shape[-2:]}")
    out = np.sum(Y.values * dB, axis=(-2, -1))
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class WickItoReport:
    T: float
    steps: int
    ito: float            # discrete int_0^T B dB
    ito_formula: float    # B(T)^2/2 - T/2
    wick: float           # B(T)^{<>2}/2 through the Wick-power/Hermite identity

    @property
    def gap_ito_formula(self) -> float:
        return self.ito - self.ito_formula

    @property
    def gap_ito_wick(self) -> float:
        return self.ito - self.wick

    @property
    def gap_formula_wick(self) -> float:
        return self.ito_formula - self.wick


def wick_ito_demo(T: float = 1.0, steps: int = 1024, seed: int = 0, stream: int = 0,
                  dB=None) -> WickItoReport:
    """Compare int_0^T B dB, B(T)^2/2 - T/2 and B(T)^{<>2}/2 on one path."""
    if dB is None:
        dB = brownian_increments(seed, stream, steps, T)
    dB = np.asarray(dB, dtype=float)
    steps = dB.shape[-1]
    ito = ito_1d(AdaptedGridProcess.path(dB), dB)
    BT = float(dB.sum())
    formula = 0.5 * BT * BT - 0.5 * T
    if T == 0.0:
        wick = 0.0
    else:
        # B(T) = w_phi with phi = chi_[0,T]; in the coordinate theta = B(T)/sqrt(T),
        # w_phi = sqrt(T) H_eps1 and its Wick square is T H_{2 eps1}
        w = basis_element((1,), math.sqrt(T))
        wick = 0.5 * evaluate(wick_power(w, 2), np.array([BT / math.sqrt(T)]))
    return WickItoReport(T, steps, ito, formula, wick)
