"""Quantum Fisher information: lossless closed form and the lossy Kraus bound.

The lossy bound minimizes, over the Kraus-family parameter gamma,

    C_Q = Var(n_a) + k^2 Var(n_b) - 2 k Cov(n_a, n_b) + (1 + gamma)^2 eta (1 - eta) <n_b>,
    k = eta + gamma * eta - gamma,

with photon-number moments taken on the state after the first beam splitter.
gamma = 0 places the loss before the phase shifter, gamma = -1 after it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError


class MomentSet(NamedTuple):
    mean_a: float
    mean_b: float
    mean_a2: float
    mean_b2: float
    cross: float

    @property
    def var_a(self) -> float:
        return self.mean_a2 - self.mean_a**2

    @property
    def var_b(self) -> float:
        return self.mean_b2 - self.mean_b**2

    @property
    def cov(self) -> float:
        return self.cross - self.mean_a * self.mean_b


@dataclass(frozen=True)
class QfiParams:
    n: int
    r: float
    eta: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be a non-negative integer, got {self.n}")
        if self.r < 0:
            raise DomainError(f"squeezing parameter must be >= 0, got {self.r}")
        if not (0 < self.eta <= 1):
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")


def qfi_ideal(n: int, r: float) -> float:
    s2 = math.sinh(2 * r) ** 2
    return (2 + 3 * s2) * n * (n + 1) + s2


def qcrb(F: float) -> float:
    if not F > 0:
        raise DomainError(f"Fisher information must be > 0, got {F}")
    return 1 / math.sqrt(F)


def moments_closed_form(n: int, r: float) -> MomentSet:
    c4 = math.cosh(r) ** 4
    s4 = math.sinh(r) ** 4
    s2r = math.sinh(2 * r) ** 2
    mean = n * math.cosh(r) ** 2 + (n + 1) * math.sinh(r) ** 2
    second = (3 * n * n + n) * c4 / 2 + (3 * n * n + 5 * n + 2) * s4 / 2 + (3 * n * n + 3 * n + 1) * s2r / 2
    cross = (n * n - n) * c4 / 2 + (n * n + 3 * n + 2) * s4 / 2 + (n * n + n) * s2r / 2
    return MomentSet(mean, mean, second, second, cross)


def cq_bound(p: QfiParams, gamma: float, moments: MomentSet | None = None) -> float:
    m = moments_closed_form(p.n, p.r) if moments is None else moments
    eta = p.eta
    k = eta + gamma * eta - gamma
    return m.var_a + k * k * m.var_b - 2 * k * m.cov + (1 + gamma) ** 2 * eta * (1 - eta) * m.mean_b


def gamma_opt(p: QfiParams, moments: MomentSet | None = None) -> float:
    """Stationary point of cq_bound in gamma (a minimum: the bound is convex in gamma)."""
    m = moments_closed_form(p.n, p.r) if moments is None else moments
    eta = p.eta
    denom = (1 - eta) * m.var_b + eta * m.mean_b
    if not denom > 0:
        raise DomainError("degenerate gamma optimization (vacuum input)")
    return (eta * m.var_b - m.cov - eta * m.mean_b) / denom


def qfi_lossy(p: QfiParams) -> float:
    m = moments_closed_form(p.n, p.r)
    return cq_bound(p, gamma_opt(p, m), m)
