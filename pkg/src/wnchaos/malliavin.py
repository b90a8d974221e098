"""Hida-Malliavin derivatives of chaos expansions and their numerical checks.

D_x F = sum_alpha sum_k c_alpha alpha_k eta_k(x) H_{alpha - eps^(k)} is stored
as one chaos expansion F_k per basis position k, so that
D_x F = sum_k eta_k(x) F_k.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .chaos import (
    ChaosExpansion,
    basis_element,
    compose_polynomial,
    evaluate,
    expectation,
    wick_exp,
)
from .errors import DomainError
from .gaussian_field import OmegaSample, brownian_increments_batch
from .hermite import BasisIndex, eta
from .ito import AdaptedGridProcess, ito_1d
from .multiindex import subtract_unit

__all__ = [
    "MalliavinDerivative",
    "hm_derivative",
    "directional_derivative",
    "ChainRuleReport",
    "chain_rule_check",
    "CLARK_OCONE_CASES",
    "ClarkOconeRow",
    "clark_ocone_reconstruct",
    "clark_ocone_table",
    "rows_to_csv",
]


@dataclass(frozen=True)
class MalliavinDerivative:
    d: int
    components: Mapping[int, ChaosExpansion] = field(default_factory=dict)

    def component(self, k: int) -> ChaosExpansion:
        return self.components.get(k, ChaosExpansion(self.d))

    def at(self, x, omega) -> float:
        """D_x F evaluated at the point x and sample omega."""
        total = 0.0
        for k, Fk in sorted(self.components.items()):
            total += eta(BasisIndex(self.d, k), x) * evaluate(Fk, omega)
        return total

    def pair(self, g: Sequence[float], omega):
        """int D_x F gamma(x) dx for gamma = sum_k g_k eta_k."""
        total = 0.0
        for k, Fk in sorted(self.components.items()):
            if k <= len(g) and g[k - 1] != 0.0:
                total = total + g[k - 1] * evaluate(Fk, omega)
        return total

    def __add__(self, other: "MalliavinDerivative") -> "MalliavinDerivative":
        keys = set(self.components) | set(other.components)
        comps = {k: self.component(k) + other.component(k) for k in keys}
        return MalliavinDerivative(self.d, {k: v for k, v in comps.items() if v.terms})

    def __mul__(self, s: float) -> "MalliavinDerivative":
        comps = {k: v * s for k, v in self.components.items()}
        return MalliavinDerivative(self.d, {k: v for k, v in comps.items() if v.terms})

    __rmul__ = __mul__


def hm_derivative(F: ChaosExpansion) -> MalliavinDerivative:
    comps: dict[int, dict] = {}
    for alpha, c in F.terms.items():
        for k, ak in alpha:
            beta = subtract_unit(alpha, k)
            bucket = comps.setdefault(k, {})
            bucket[beta] = bucket.get(beta, 0.0) + c * ak
    out = {k: ChaosExpansion(F.d, terms) for k, terms in sorted(comps.items())}
    return MalliavinDerivative(F.d, {k: v for k, v in out.items() if v.terms})


def directional_derivative(F: ChaosExpansion, g: Sequence[float], omega: OmegaSample,
                           eps: float = 1e-5, richardson: bool = False) -> float:
    """[F(omega + eps*gamma) - F(omega)] / eps, gamma = sum_i g_i eta_i.

    With ``richardson=True`` the forward differences at eps and eps/2 are
    combined to cancel the O(eps) term.
    """
    if eps <= 0:
        raise DomainError(f"step must be positive, got {eps}")
    base = evaluate(F, omega)

    def fd(h):
        return (evaluate(F, omega.shifted(g, h)) - base) / h

    if richardson:
        return 2.0 * fd(0.5 * eps) - fd(eps)
    return fd(eps)


# ---------------------------------------------------------------------------
# Chain rule


@dataclass(frozen=True)
class ChainRuleReport:
    max_probe_gap: float        # max over probes of |D phi(F) - phi'(F) DF| / max(1, |phi'(F) DF|)
    max_coefficient_gap: float  # max over k, alpha of the chaos-coefficient mismatch
    probes: int


def chain_rule_check(F: ChaosExpansion, p: Sequence[float], probes: int = 100,
                     seed: int = 0) -> ChainRuleReport:
    """Compare D(phi(F)) with phi'(F) D F for the polynomial phi(y) = sum p_i y^i."""
    from .gaussian_field import sample_omega

    p = list(p)
    if len(p) - 1 > 4:
        raise DomainError("chain_rule_check supports polynomials of degree <= 4")
    if F.max_degree > 3:
        raise DomainError("chain_rule_check supports expansions of degree <= 3")
    dp = [i * c for i, c in enumerate(p)][1:] or [0.0]
    phiF = compose_polynomial(F, p)
    dphiF = compose_polynomial(F, dp)
    lhs = hm_derivative(phiF)
    DF = hm_derivative(F)
    # coefficient-level identity D(phi(F))_k = phi'(F) * (DF)_k
    coef_gap = 0.0
    for k in set(lhs.components) | set(DF.components):
        diff = lhs.component(k) - dphiF * DF.component(k)
        coef_gap = max(coef_gap, max((abs(c) for c in diff.terms.values()), default=0.0))
    J = max(F.max_basis, 1)
    gen = np.random.Generator(np.random.Philox(key=seed))
    worst = 0.0
    for n in range(probes):
        omega = sample_omega(seed, n, J)
        x = gen.uniform(-2.0, 2.0, size=F.d)
        a = lhs.at(x, omega)
        b = evaluate(dphiF, omega) * DF.at(x, omega)
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    return ChainRuleReport(worst, coef_gap, probes)


# ---------------------------------------------------------------------------
# Clark-Ocone reconstruction, d = 1, cases with closed-form conditional expectations

CLARK_OCONE_CASES = ("B_T", "B_T_squared", "wick_exp_phi")


def _chaos_form(case: str, T: float) -> ChaosExpansion:
    """F in the coordinate theta_1 = B(T)/sqrt(T)."""
    w = basis_element((1,), math.sqrt(T))
    if case == "B_T":
        return w
    if case == "B_T_squared":
        return compose_polynomial(w, [0.0, 0.0, 1.0])
    return wick_exp(w, 30).value


@dataclass(frozen=True)
class ClarkOconeRow:
    case: str
    steps: int
    paths: int
    rms_error: float
    mean_abs_error: float
    expectation: float


def _reconstruct(case: str, dB: np.ndarray, T: float, EF: float):
    steps = dB.shape[-1]
    dt = T / steps
    path = AdaptedGridProcess.path(dB)
    BT = dB.sum(axis=-1)
    if case == "B_T":
        F = BT
        integrand = AdaptedGridProcess(np.ones_like(dB), 1)
    elif case == "B_T_squared":
        F = BT * BT
        integrand = path * 2.0
    else:
        # phi = chi_[0,T]; E[D_t F | F_t] = exp(B(t) - t/2)
        F = np.exp(BT - 0.5 * T)
        t_left = dt * np.arange(steps)
        integrand = AdaptedGridProcess(np.exp(path.values - 0.5 * t_left), 1)
    rhs = EF + ito_1d(integrand, dB)
    return F - rhs


def clark_ocone_table(case: str, steps: Sequence[int], paths: int, seed: int = 0,
                      T: float = 1.0) -> list[ClarkOconeRow]:
    """Reconstruction errors on nested refinements of the same Brownian paths."""
    if case not in CLARK_OCONE_CASES:
        raise DomainError(f"unknown Clark-Ocone case {case!r}; choose from {CLARK_OCONE_CASES}")
    if paths < 1:
        raise DomainError("need at least one path")
    steps = sorted(int(s) for s in steps)
    finest = steps[-1]
    if any(finest % s for s in steps):
        raise DomainError("every step count must divide the finest one")
    EF = expectation(_chaos_form(case, T))
    dB_fine = brownian_increments_batch(seed, range(paths), finest, T)
    rows = []
    for s in steps:
        dB = dB_fine if s == finest else _coarsen_1d(dB_fine, finest // s)
        err = _reconstruct(case, dB, T, EF)
        rows.append(ClarkOconeRow(case, s, paths, float(np.sqrt(np.mean(err * err))),
                                  float(np.mean(np.abs(err))), EF))
    return rows


def _coarsen_1d(dB: np.ndarray, factor: int) -> np.ndarray:
    return dB.reshape(*dB.shape[:-1], dB.shape[-1] // factor, factor).sum(axis=-1)


def clark_ocone_reconstruct(case: str, steps: int, paths: int, seed: int = 0,
                            T: float = 1.0) -> ClarkOconeRow:
    return clark_ocone_table(case, [steps], paths, seed, T)[0]


def rows_to_csv(rows: Sequence[ClarkOconeRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "steps", "paths", "rms_error", "mean_abs_error"])
    for r in rows:
        w.writerow([r.case, r.steps, r.paths, f"{r.rms_error:.17g}", f"{r.mean_abs_error:.17g}"])
    return buf.getvalue()
