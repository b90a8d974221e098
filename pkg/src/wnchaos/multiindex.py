"""Finitely supported multi-indices and the ordering of d-dimensional basis indices.

Positions are 1-based throughout, matching the indexing of the Hermite basis
``eta_1, eta_2, ...``.  A :class:`MultiIndex` is stored in canonical sparse
form as sorted ``(position, value)`` pairs with ``value > 0``.
"""

from __future__ import annotations

import math
import sys
from functools import lru_cache
from typing import Iterable

from .errors import DomainError, NumericalFailure

__all__ = [
    "MultiIndex",
    "factorial",
    "factorial_float",
    "weight_2n",
    "add",
    "subtract_unit",
    "enumerate_basis",
    "basis_position",
    "basis_block",
]


class MultiIndex:
    """Finitely supported sequence of nonnegative integers.

    ``MultiIndex((2, 0, 1))`` has entries alpha_1 = 2, alpha_3 = 1.  Trailing
    zeros are dropped, so ``MultiIndex((1, 0)) == MultiIndex((1,))``.
    """

    __slots__ = ("_pairs", "_degree", "_hash")

    def __init__(self, entries: Iterable[int] = ()):
        pairs = []
        for pos, v in enumerate(entries, start=1):
            v = int(v)
            if v < 0:
                raise DomainError(f"negative multi-index entry {v} at position {pos}")
            if v:
                pairs.append((pos, v))
        self._set(tuple(pairs))

    def _set(self, pairs: tuple[tuple[int, int], ...]) -> None:
        self._pairs = pairs
        self._degree = sum(v for _, v in pairs)
        self._hash = hash(pairs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "MultiIndex":
        acc: dict[int, int] = {}
        for pos, v in pairs:
            pos, v = int(pos), int(v)
            if pos < 1:
                raise DomainError(f"multi-index positions start at 1, got {pos}")
            if v < 0:
                raise DomainError(f"negative multi-index entry {v} at position {pos}")
            if v:
                acc[pos] = acc.get(pos, 0) + v
        obj = cls.__new__(cls)
        obj._set(tuple(sorted(acc.items())))
        return obj

    @classmethod
    def unit(cls, k: int, times: int = 1) -> "MultiIndex":
        """``times * eps^(k)``: the index with a single entry at position k."""
        return cls.from_pairs([(k, times)])

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return self._pairs

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def max_position(self) -> int:
        return self._pairs[-1][0] if self._pairs else 0

    @property
    def entries(self) -> tuple[int, ...]:
        """Dense entries up to the last nonzero position."""
        out = [0] * self.max_position
        for pos, v in self._pairs:
            out[pos - 1] = v
        return tuple(out)

    def __getitem__(self, k: int) -> int:
        for pos, v in self._pairs:
            if pos == k:
                return v
        return 0

    def __iter__(self):
        return iter(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __bool__(self) -> bool:
        return bool(self._pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return self._pairs == other._pairs

    def __lt__(self, other: "MultiIndex") -> bool:
        # degree first, then dense entries; gives a fixed summation order
        return (self._degree, self.entries) < (other._degree, other.entries)

    def __hash__(self) -> int:
        return self._hash

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return add(self, other)

    def __repr__(self) -> str:
        return f"MultiIndex({self.entries})"


def factorial(alpha: MultiIndex) -> int:
    """alpha! = prod alpha_i!, exact."""
    out = 1
    for _, v in alpha:
        out *= math.factorial(v)
    return out


def factorial_float(alpha: MultiIndex) -> float:
    """alpha! as a float; raises NumericalFailure if it is not representable."""
    f = factorial(alpha)
    if f > sys.float_info.max:
        raise NumericalFailure(f"{alpha!r}! overflows double precision")
    return float(f)


def weight_2n(alpha: MultiIndex, q: float) -> float:
    """(2N)^(q*alpha) = prod_j (2j)^(q*alpha_j)."""
    # sum of logs, so huge or tiny weights saturate to inf / 0 instead of raising
    log_w = sum(q * v * math.log(2 * pos) for pos, v in alpha)
    try:
        return math.exp(log_w)
    except OverflowError:
        return math.inf


def add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return MultiIndex.from_pairs(alpha.pairs + beta.pairs)


def subtract_unit(alpha: MultiIndex, k: int) -> MultiIndex:
    """alpha - eps^(k); requires alpha_k >= 1."""
    if alpha[k] < 1:
        raise DomainError(f"cannot subtract eps^({k}) from {alpha!r}")
    return MultiIndex.from_pairs(
        (pos, v - 1 if pos == k else v) for pos, v in alpha.pairs
    )


# ---------------------------------------------------------------------------
# Ordering of N^d: by degree |delta| ascending, lexicographic within a degree.


@lru_cache(maxsize=None)
def _count(d: int, s: int) -> int:
    """Number of delta in N^d (entries >= 1) with |delta| = s."""
    if s < d:
        return 0
    return math.comb(s - 1, d - 1)


def _count_upto(d: int, s: int) -> int:
    # number with degree <= s is C(s, d)
    return math.comb(s, d) if s >= d else 0


def enumerate_basis(d: int, j: int) -> tuple[int, ...]:
    """The j-th (1-based) element of N^d in degree-then-lexicographic order."""
    if d < 1 or j < 1:
        raise DomainError(f"need d >= 1 and j >= 1, got d={d}, j={j}")
    if d == 1:
        return (j,)
    # smallest degree s with C(s, d) >= j
    s = d
    while _count_upto(d, s) < j:
        s += 1
    r = j - _count_upto(d, s - 1)  # 1-based rank within degree s
    out = []
    remaining = s
    for pos in range(d, 1, -1):
        # first entry v ranges 1..remaining-(pos-1), lexicographically ascending
        v = 1
        while True:
            c = _count(pos - 1, remaining - v)
            if r <= c:
                break
            r -= c
            v += 1
        out.append(v)
        remaining -= v
    out.append(remaining)
    return tuple(out)


def basis_position(delta: Iterable[int]) -> int:
    """Inverse of :func:`enumerate_basis`."""
    delta = tuple(int(v) for v in delta)
    d = len(delta)
    if d == 0 or min(delta) < 1:
        raise DomainError(f"basis multi-indices have entries >= 1, got {delta}")
    s = sum(delta)
    j = _count_upto(d, s - 1)
    remaining = s
    for i, v in enumerate(delta[:-1]):
        pos = d - i
        for smaller in range(1, v):
            j += _count(pos - 1, remaining - smaller)
        remaining -= v
    return j + 1


@lru_cache(maxsize=16)
def basis_block(d: int, J: int) -> tuple[tuple[int, ...], ...]:
    """``(enumerate_basis(d, 1), ..., enumerate_basis(d, J))`` built in one pass."""
    if d < 1 or J < 0:
        raise DomainError(f"need d >= 1 and J >= 0, got d={d}, J={J}")
    out: list[tuple[int, ...]] = []
    s = d
    while len(out) < J:
        out.extend(_compositions(d, s))
        s += 1
    return tuple(out[:J])


def _compositions(d: int, s: int):
    """All delta in N^d with |delta| = s, lexicographically ascending."""
    if d == 1:
        yield (s,)
        return
    for v in range(1, s - d + 2):
        for rest in _compositions(d - 1, s - v):
            yield (v,) + rest
