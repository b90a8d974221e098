"""Sparse Wiener-Ito chaos expansions F = sum_alpha c_alpha H_alpha.

H_alpha(omega) = prod_i h_{alpha_i}(theta_i) with theta_i = <omega, eta_i> the
Gaussian coordinates of a sample.  Expansions are immutable; every binary
operation returns a new one and cancellations are pruned at exactly 0.0.

Nothing here truncates silently.  Use :func:`truncate` to impose degree or
basis caps.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import DomainError
from .hermite import hermite_poly_all
from .multiindex import MultiIndex, factorial_float, weight_2n

__all__ = [
    "ChaosExpansion",
    "constant",
    "first_chaos",
    "basis_element",
    "l2_norm_sq",
    "hida_norm_sq",
    "test_norm_sq",
    "wick_product",
    "wick_power",
    "wick_exp",
    "WickExp",
    "evaluate",
    "expectation",
    "truncate",
    "product",
    "compose_polynomial",
    "dumps",
    "loads",
]

EMPTY = MultiIndex()


@dataclass(frozen=True)
class ChaosExpansion:
    """Sparse coefficient map MultiIndex -> float over parameter dimension ``d``."""

    d: int
    terms: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1:
            raise DomainError(f"parameter dimension must be >= 1, got {self.d}")
        clean = {}
        for alpha, c in self.terms.items():
            if not isinstance(alpha, MultiIndex):
                alpha = MultiIndex(alpha)
            c = float(c)
            if c != 0.0:
                clean[alpha] = clean.get(alpha, 0.0) + c
        clean = {a: c for a, c in sorted(clean.items(), key=lambda kv: kv[0]) if c != 0.0}
        object.__setattr__(self, "terms", clean)

    @property
    def max_degree(self) -> int:
        return max((a.degree for a in self.terms), default=0)

    @property
    def max_basis(self) -> int:
        return max((a.max_position for a in self.terms), default=0)

    def coefficient(self, alpha) -> float:
        if not isinstance(alpha, MultiIndex):
            alpha = MultiIndex(alpha)
        return self.terms.get(alpha, 0.0)

    def __len__(self) -> int:
        return len(self.terms)

    def _check(self, other: "ChaosExpansion") -> None:
        if self.d != other.d:
            raise DomainError(f"dimension mismatch: d={self.d} vs d={other.d}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = constant(other, self.d)
        self._check(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0.0) + c
        return ChaosExpansion(self.d, out)

    __radd__ = __add__

    def __neg__(self):
        return ChaosExpansion(self.d, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = constant(other, self.d)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, s):
        if isinstance(s, ChaosExpansion):
            return product(self, s)
        return ChaosExpansion(self.d, {a: c * s for a, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, s: float):
        return ChaosExpansion(self.d, {a: c / s for a, c in self.terms.items()})

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*H{a.entries}" for a, c in self.terms.items()) or "0"
        return f"ChaosExpansion(d={self.d}: {body})"


def constant(c: float, d: int = 1) -> ChaosExpansion:
    return ChaosExpansion(d, {EMPTY: c})


def basis_element(alpha, c: float = 1.0, d: int = 1) -> ChaosExpansion:
    """c * H_alpha."""
    if not isinstance(alpha, MultiIndex):
        alpha = MultiIndex(alpha)
    return ChaosExpansion(d, {alpha: c})


def first_chaos(a: Iterable[float], d: int = 1) -> ChaosExpansion:
    """w_phi = <omega, phi> for phi = sum_j a_j eta_j, i.e. sum_j a_j H_{eps^(j)}."""
    return ChaosExpansion(d, {MultiIndex.unit(j): c for j, c in enumerate(a, start=1)})


def l2_norm_sq(F: ChaosExpansion) -> float:
    return sum(factorial_float(a) * c * c for a, c in F.terms.items())


def hida_norm_sq(F: ChaosExpansion, q: float) -> float:
    """||F||^2_{-q} = sum alpha! c^2 (2N)^(-q alpha)."""
    return sum(factorial_float(a) * c * c * weight_2n(a, -q) for a, c in F.terms.items())


def test_norm_sq(F: ChaosExpansion, k: int) -> float:
    """||F||^2_k = sum c^2 (alpha!)^2 (2N)^(k alpha)."""
    return sum(factorial_float(a) ** 2 * c * c * weight_2n(a, k) for a, c in F.terms.items())


def wick_product(F: ChaosExpansion, G: ChaosExpansion) -> ChaosExpansion:
    """(F <> G)_gamma = sum over alpha + beta = gamma of a_alpha * b_beta."""
    F._check(G)
    out: dict[MultiIndex, float] = {}
    # fixed iteration order (terms are stored sorted) keeps sums bit-stable
    for a, ca in F.terms.items():
        for b, cb in G.terms.items():
            g = a + b
            out[g] = out.get(g, 0.0) + ca * cb
    return ChaosExpansion(F.d, out)


def wick_power(F: ChaosExpansion, n: int) -> ChaosExpansion:
    if n < 0:
        raise DomainError(f"Wick power must be >= 0, got {n}")
    result = constant(1.0, F.d)
    base = F
    while n:
        if n & 1:
            result = wick_product(result, base)
        n >>= 1
        if n:
            base = wick_product(base, base)
    return result


class WickExp(NamedTuple):
    value: ChaosExpansion
    tail_hida_norm: float  # ||F^{<>N}/N!||_{-2}, size of the last included term


def wick_exp(F: ChaosExpansion, N: int = 20) -> WickExp:
    """sum_{n=0}^N F^{<>n} / n! for F with zero constant term."""
    if F.coefficient(EMPTY) != 0.0:
        raise DomainError(
            "wick_exp needs a zero-mean argument; factor exp(c) out of the constant term"
        )
    if N < 0:
        raise DomainError(f"truncation order must be >= 0, got {N}")
    total = constant(1.0, F.d)
    term = constant(1.0, F.d)
    for n in range(1, N + 1):
        term = wick_product(term, F) / n
        total = total + term
    tail = math.sqrt(hida_norm_sq(term, 2.0))
    return WickExp(total, tail)


def _theta_of(omega) -> np.ndarray:
    theta = getattr(omega, "theta", omega)
    return np.asarray(theta, dtype=float)


def evaluate(F: ChaosExpansion, omega) -> float | np.ndarray:
    """sum_alpha c_alpha prod_i h_{alpha_i}(theta_i).

    ``omega`` is an ``OmegaSample`` or a theta array; a 2-D array of shape
    ``(samples, J)`` evaluates all samples at once.
    """
    theta = _theta_of(omega)
    J = theta.shape[-1]
    if F.max_basis > J:
        raise DomainError(
            f"expansion uses basis position {F.max_basis}, sample has only {J} coordinates"
        )
    batch_shape = theta.shape[:-1]
    positions = sorted({pos for a in F.terms for pos, _ in a})
    hvals = {}
    for pos in positions:
        deg = max(a[pos] for a in F.terms)
        hvals[pos] = hermite_poly_all(deg, theta[..., pos - 1])
    total = np.zeros(batch_shape)
    for a, c in F.terms.items():
        term = np.full(batch_shape, c)
        for pos, v in a:
            term = term * hvals[pos][v]
        total = total + term
    return total if batch_shape else float(total)


def expectation(F: ChaosExpansion) -> float:
    return F.coefficient(EMPTY)


def truncate(F: ChaosExpansion, max_degree: int | None = None,
             max_basis: int | None = None) -> ChaosExpansion:
    keep = {}
    for a, c in F.terms.items():
        if max_degree is not None and a.degree > max_degree:
            continue
        if max_basis is not None and a.max_position > max_basis:
            continue
        keep[a] = c
    return ChaosExpansion(F.d, keep)


# ---------------------------------------------------------------------------
# Ordinary (pointwise) products, linearized back into the H_alpha basis.


def _hermite_linearization(m: int, n: int) -> list[tuple[int, int]]:
    """h_m h_n = sum_r r! C(m,r) C(n,r) h_{m+n-2r}; returns (degree, coeff) pairs."""
    return [(m + n - 2 * r, math.factorial(r) * math.comb(m, r) * math.comb(n, r))
            for r in range(min(m, n) + 1)]


def _product_indices(a: MultiIndex, b: MultiIndex) -> dict[MultiIndex, int]:
    da, db = dict(a.pairs), dict(b.pairs)
    out: dict[MultiIndex, int] = {EMPTY: 1}
    for pos in sorted(set(da) | set(db)):
        lin = _hermite_linearization(da.get(pos, 0), db.get(pos, 0))
        nxt: dict[MultiIndex, int] = {}
        for idx, w in out.items():
            for deg, c in lin:
                key = idx + MultiIndex.unit(pos, deg) if deg else idx
                nxt[key] = nxt.get(key, 0) + w * c
        out = nxt
    return out


def product(F: ChaosExpansion, G: ChaosExpansion) -> ChaosExpansion:
    """Pointwise product F * G expressed as a chaos expansion (exact)."""
    F._check(G)
    out: dict[MultiIndex, float] = {}
    for a, ca in F.terms.items():
        for b, cb in G.terms.items():
            for g, w in _product_indices(a, b).items():
                out[g] = out.get(g, 0.0) + w * ca * cb
    return ChaosExpansion(F.d, out)


def compose_polynomial(F: ChaosExpansion, coeffs: Iterable[float]) -> ChaosExpansion:
    """p(F) for p(y) = sum_i coeffs[i] y^i, by Horner's rule in ordinary products."""
    coeffs = list(coeffs)
    result = constant(0.0, F.d)
    for c in reversed(coeffs):
        result = product(result, F) + constant(c, F.d)
    return result


# ---------------------------------------------------------------------------
# Line-based text format:
#   d=<int>
#   alpha=<comma-separated dense entries> c=<decimal>

_TERM_RE = re.compile(r"^alpha=([0-9,]*)\s+c=(\S+)$")


def dumps(F: ChaosExpansion) -> str:
    lines = [f"d={F.d}"]
    for a, c in F.terms.items():
        lines.append(f"alpha={','.join(str(v) for v in a.entries)} c={c!r}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> ChaosExpansion:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("d="):
        raise DomainError("chaos text must start with a 'd=<int>' header")
    try:
        d = int(lines[0][2:])
    except ValueError as exc:
        raise DomainError(f"bad dimension header {lines[0]!r}") from exc
    terms: dict[MultiIndex, float] = {}
    for lineno, ln in enumerate(lines[1:], start=2):
        m = _TERM_RE.match(ln)
        if not m:
            raise DomainError(f"line {lineno}: cannot parse term {ln!r}")
        entries = [int(v) for v in m.group(1).split(",") if v != ""]
        alpha = MultiIndex(entries)
        terms[alpha] = terms.get(alpha, 0.0) + float(m.group(2))
    return ChaosExpansion(d, terms)
