"""Truncated power series in the four auxiliary variables (x, y, t, tau).

The parity generating functions are exponentials of quadratic forms in
these variables; the parity itself is the coefficient of x^n y^n t^n tau^n
(scaled by (n!)^2). Series are dense complex arrays of shape (cap+1,)*4 where
``coefficients[i, j, k, m]`` multiplies x^i y^j t^k tau^m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import factorial
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionError, DomainError

VARIABLES = ("x", "y", "t", "tau")
_INDEX = {name: i for i, name in enumerate(VARIABLES)}
PAIRS = tuple(combinations_with_replacement(VARIABLES, 2))


def _canonical_pair(key) -> tuple[str, str]:
    if isinstance(key, str):
        parts = key.replace(" ", "").split("*")
        if len(parts) == 1:
            # compact spellings such as "xy", "ttau", "xx"
            parts = _split_compact(key)
    else:
        parts = list(key)
    if len(parts) != 2 or any(p not in _INDEX for p in parts):
        raise KeyError(f"not a variable pair: {key!r}")
    a, b = sorted(parts, key=_INDEX.__getitem__)
    return a, b


def _split_compact(key: str) -> list[str]:
    out = []
    rest = key
    while rest:
        if rest.startswith("tau"):
            out.append("tau")
            rest = rest[3:]
        elif rest[0] in "xyt":
            out.append(rest[0])
            rest = rest[1:]
        else:
            raise KeyError(f"not a variable pair: {key!r}")
    return out


@dataclass(frozen=True)
class MultiSeries:
    """Dense truncated series with per-variable degree cap."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 4 or len(set(c.shape)) != 1:
            raise DimensionError(f"coefficient table must be (cap+1)^4, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zeros(cls, degree_cap: int) -> "MultiSeries":
        if degree_cap < 0:
            raise DomainError("degree_cap must be >= 0")
        return cls(np.zeros((degree_cap + 1,) * 4, dtype=complex))

    @classmethod
    def one(cls, degree_cap: int) -> "MultiSeries":
        c = np.zeros((degree_cap + 1,) * 4, dtype=complex)
        c[0, 0, 0, 0] = 1.0
        return cls(c)

    @property
    def degree_cap(self) -> int:
        return self.coefficients.shape[0] - 1

    def coefficient(self, i: int, j: int, k: int, m: int) -> complex:
        cap = self.degree_cap
        if max(i, j, k, m) > cap or min(i, j, k, m) < 0:
            return 0j
        return complex(self.coefficients[i, j, k, m])

    def _check(self, other: "MultiSeries"):
        if other.degree_cap != self.degree_cap:
            raise DimensionError("series have different degree caps")

    def __add__(self, other):
        if isinstance(other, MultiSeries):
            self._check(other)
            return MultiSeries(self.coefficients + other.coefficients)
        c = self.coefficients.copy()
        c[0, 0, 0, 0] += other
        return MultiSeries(c)

    __radd__ = __add__

    def __neg__(self):
        return MultiSeries(-self.coefficients)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MultiSeries):
            self._check(other)
            return MultiSeries(_truncated_product(self.coefficients, other.coefficients))
        return MultiSeries(self.coefficients * other)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, scalar):
        return MultiSeries(self.coefficients / scalar)

    def conj(self) -> "MultiSeries":
        return MultiSeries(self.coefficients.conj())


def _truncated_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Loop over the sparser factor; exponents of quadratic forms have <= 10 terms.
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    cap = a.shape[0] - 1
    out = np.zeros_like(b)
    for i, j, k, m in zip(*np.nonzero(a)):
        out[i:, j:, k:, m:] += a[i, j, k, m] * b[: cap + 1 - i, : cap + 1 - j, : cap + 1 - k, : cap + 1 - m]
    return out


@dataclass(frozen=True)
class QuadraticExponent:
    """Purely quadratic form sum_{p<=q} c_pq v_p v_q in (x, y, t, tau).

    Keys may be given as tuples ``("x", "tau")`` or strings ``"xtau"``,
    ``"x*tau"``; they are stored canonically ordered.
    """

    pair_coefficients: Mapping[tuple[str, str], complex] = field(default_factory=dict)

    def __post_init__(self):
        canon: dict[tuple[str, str], complex] = {}
        for key, val in dict(self.pair_coefficients).items():
            pair = _canonical_pair(key)
            canon[pair] = canon.get(pair, 0j) + complex(val)
        object.__setattr__(self, "pair_coefficients", canon)

    @classmethod
    def from_product(cls, u: Mapping[str, complex], v: Mapping[str, complex], scale: complex = 1.0) -> "QuadraticExponent":
        """Expand ``scale * (u . X) * (v . X)`` of two linear forms into pair slots."""
        terms: dict[tuple[str, str], complex] = {}
        for a, ua in u.items():
            for b, vb in v.items():
                pair = _canonical_pair((a, b))
                terms[pair] = terms.get(pair, 0j) + scale * ua * vb
        return cls(terms)

    def __add__(self, other: "QuadraticExponent") -> "QuadraticExponent":
        merged = dict(self.pair_coefficients)
        for k, v in other.pair_coefficients.items():
            merged[k] = merged.get(k, 0j) + v
        return QuadraticExponent(merged)

    def __getitem__(self, key) -> complex:
        return self.pair_coefficients.get(_canonical_pair(key), 0j)

    def conj(self) -> "QuadraticExponent":
        return QuadraticExponent({k: np.conj(v) for k, v in self.pair_coefficients.items()})


def sum_quadratics(parts: Iterable[QuadraticExponent]) -> QuadraticExponent:
    total = QuadraticExponent()
    for p in parts:
        total = total + p
    return total


def series_from_quadratic(q: QuadraticExponent, degree_cap: int) -> MultiSeries:
    """Embed a quadratic form as a series; monomials above the cap are dropped."""
    if degree_cap < 0:
        raise DomainError("degree_cap must be >= 0")
    c = np.zeros((degree_cap + 1,) * 4, dtype=complex)
    for (a, b), val in q.pair_coefficients.items():
        e = [0, 0, 0, 0]
        e[_INDEX[a]] += 1
        e[_INDEX[b]] += 1
        if max(e) <= degree_cap:
            c[tuple(e)] += val
    return MultiSeries(c)


def series_exp(s: MultiSeries) -> MultiSeries:
    """exp(s) truncated at the cap, for s without constant term.

    Summed to order 2*cap: every monomial of s has total degree >= 2 (true for
    all exponents used here), and in-cap monomials have total degree <= 4*cap.
    """
    if s.coefficients[0, 0, 0, 0] != 0:
        raise DomainError("series_exp requires a zero constant term")
    cap = s.degree_cap
    result = np.zeros_like(s.coefficients)
    result[0, 0, 0, 0] = 1.0
    term = result.copy()
    for p in range(1, 2 * cap + 1):
        term = _truncated_product(s.coefficients, term) / p
        result += term
    return MultiSeries(result)


def extract_Dn(s: MultiSeries, n: int) -> complex:
    """(n!)^-2 d^{4n}/dx^n dy^n dt^n dtau^n at zero, i.e. (n!)^2 [x^n y^n t^n tau^n]."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if s.degree_cap < n:
        raise DimensionError(f"degree cap {s.degree_cap} < n = {n}")
    return factorial(n) ** 2 * complex(s.coefficients[n, n, n, n])
