"""Analytic parity signals and phase sensitivities.

All public functions take the *shifted* phase convention in which the ideal
optimum sits at phi = 0; the physical phase of the shifter is
``physical_phase(phi) = phi + pi/2``.

Each parity signal has the form  prefactor * D_n{ exp[Q(x, y, t, tau)] }  with
Q a quadratic form whose coefficients depend on (r, phi, T). The quadratic
forms are assembled here and handed to the series engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DivergentSensitivityError, DomainError, InfeasibleEnergyError, NoSignalError
from .series import QuadraticExponent, extract_Dn, series_exp, series_from_quadratic, sum_quadratics

DEFAULT_DERIV_STEP = 1e-5
DERIVATIVE_FLOOR = 1e-12
GOLDEN = (math.sqrt(5) - 1) / 2


class Scenario(str, Enum):
    IDEAL = "ideal"
    EXTERNAL = "external"
    INTERNAL = "internal"


@dataclass(frozen=True)
class SchemeParams:
    """Input-state order n, squeezing r, shifted phase phi, loss scenario.

    ``transmissivity`` is T1 for external loss and T2 for internal loss; it
    must be 1 for the ideal scenario.
    """

    n: int
    r: float
    phi: float = 0.0
    scenario: Scenario = Scenario.IDEAL
    transmissivity: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be a non-negative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not self.r > 0:
            raise DomainError(f"squeezing parameter must be > 0, got {self.r}")
        if not (0 < self.transmissivity <= 1):
            raise DomainError(f"transmissivity must lie in (0, 1], got {self.transmissivity}")
        if self.scenario is Scenario.IDEAL and self.transmissivity != 1:
            raise DomainError("ideal scenario requires transmissivity 1")

    def with_phi(self, phi: float) -> "SchemeParams":
        return replace(self, phi=phi)


@dataclass(frozen=True)
class ExponentCoefficients:
    """Prefactor and quadratic exponent of one parity generating function.

    ``scalars`` keeps the named intermediate quantities (omega, A_k, eps_k,
    X_k, E, ...) for inspection.
    """

    prefactor: complex
    exponent: QuadraticExponent
    scalars: dict


def physical_phase(phi: float) -> float:
    """Shifted phase -> physical phase of the exp(-i phi J3) shifter."""
    return phi + math.pi / 2


def omega0(r: float, phi: float) -> float:
    """1 - 2 tanh^2 r cos 2phi + tanh^4 r, rewritten to avoid cancellation near phi = 0."""
    return math.cosh(r) ** -4 + 4 * (math.tanh(r) * math.sin(phi)) ** 2


def ideal_coefficients(r: float, phi: float) -> ExponentCoefficients:
    th = math.tanh(r)
    sech = 1 / math.cosh(r)
    w0 = omega0(r, phi)
    A0 = sech**2 / math.sqrt(w0)
    A1 = math.sin(2 * phi) * th / (2 * w0 * math.cosh(r) ** 2)
    A2 = (math.cos(2 * phi) - 1) * (th + th**3) / w0
    A3 = math.sin(phi) * math.cosh(2 * r) * sech**4 / w0
    A4 = -math.cos(phi) * sech**4 / w0
    q = QuadraticExponent(
        {
            "xx": A1, "tt": A1, "yy": -A1, "tautau": -A1,
            "xy": A2, "ttau": A2,
            "ytau": A3, "xt": -A3,
            "xtau": A4, "yt": A4,
        }
    )
    scalars = {"omega0": w0, "A0": A0, "A1": A1, "A2": A2, "A3": A3, "A4": A4}
    return ExponentCoefficients(A0, q, scalars)


def external_coefficients(r: float, phi: float, T1: float) -> ExponentCoefficients:
    th = math.tanh(r)
    sech = 1 / math.cosh(r)
    e1 = -T1 * math.cos(phi)
    e2 = 1 - T1 * (1 + math.sin(phi))
    e3 = 1 - T1 * (1 - math.sin(phi))
    g = e1 * e1 + e2 * e3
    w1 = (g * th**2 - 1) ** 2 - 4 * e1**2 * e2 * e3 * th**4
    mu = {"x": e1 * sech * th, "y": e3 * sech * th, "tau": 2 * e1 * e3 * th**2 * sech, "t": sech}
    kappa = {"tau": g * sech * th, "x": e2 * sech, "y": e1 * sech}
    q = sum_quadratics(
        [
            QuadraticExponent.from_product(mu, kappa, (1 - g * th**2) / w1),
            QuadraticExponent.from_product(mu, mu, e1 * e2 * th / w1),
            QuadraticExponent.from_product(kappa, kappa, e1 * e3 * th**3 / w1),
            QuadraticExponent(
                {
                    "xtau": e1 * sech**2,
                    "ytau": e3 * sech**2,
                    "tautau": e1 * e3 * sech**2 * th,
                    "ttau": -th,
                    "xy": -th,
                }
            ),
        ]
    )
    C1 = sech**2 / math.sqrt(w1)
    scalars = {"omega1": w1, "C1": C1, "eps1": e1, "eps2": e2, "eps3": e3}
    return ExponentCoefficients(C1, q, scalars)


def internal_coefficients(r: float, phi: float, T2: float) -> ExponentCoefficients:
    th = math.tanh(r)
    sech = 1 / math.cosh(r)
    sT = math.sqrt(T2)
    s, c = math.sin(phi), math.cos(phi)
    X1 = -(2 * sT * s + 1 + T2) / 2
    denom = 2 * (1j * T2 - 1j + 2 * sT * c)
    if denom == 0:
        raise DivergentSensitivityError("internal-loss coefficients singular at T2 = 1, cos(phi) = 0")
    X2 = ((T2 + 1) ** 2 - 4 * T2 * s * s) / denom
    X3 = (2 * sT * s - 1 - T2) / 2
    X2c = X2.conjugate()
    E = abs(X2) ** 2 + X1 * X3 + X3 + X1 + 1
    w2 = (1 - E * th**2) ** 2 - 4 * abs(X2) ** 2 * (X1 + 1) * (X3 + 1) * th**4
    mu = {"y": -X2c * sech * th, "x": (X1 + 1) * sech * th, "t": -2 * (X1 + 1) * X2c * th**2 * sech, "tau": sech}
    kappa = {"t": E * sech * th, "y": (X3 + 1) * sech, "x": -X2 * sech}
    g4 = -X1 * X2c - X2c
    q = sum_quadratics(
        [
            QuadraticExponent.from_product(mu, kappa, (1 - E * th**2) / w2),
            QuadraticExponent.from_product(mu, mu, -X2 * (X3 + 1) * th / w2),
            QuadraticExponent.from_product(kappa, kappa, g4 * th**3 / w2),
            QuadraticExponent(
                {
                    "yt": -X2c * sech**2,
                    "xt": (X1 + 1) * sech**2,
                    "tt": g4 * sech**2 * th,
                    "xy": -th,
                    "ttau": -th,
                }
            ),
        ]
    )
    D1 = sech**2 / math.sqrt(w2)
    scalars = {"omega2": w2, "D1": D1, "X1": X1, "X2": X2, "X3": X3, "E": E}
    return ExponentCoefficients(D1, q, scalars)


def coefficients(p: SchemeParams) -> ExponentCoefficients:
    if p.scenario is Scenario.IDEAL:
        return ideal_coefficients(p.r, p.phi)
    if p.scenario is Scenario.EXTERNAL:
        return external_coefficients(p.r, p.phi, p.transmissivity)
    return internal_coefficients(p.r, p.phi, p.transmissivity)


def _evaluate(coef: ExponentCoefficients, n: int) -> complex:
    if n == 0:
        return complex(coef.prefactor)
    s = series_exp(series_from_quadratic(coef.exponent, n))
    return coef.prefactor * extract_Dn(s, n)


def parity_complex(p: SchemeParams) -> complex:
    """Parity signal before discarding the (round-off) imaginary residue."""
    return _evaluate(coefficients(p), p.n)


def parity(p: SchemeParams) -> float:
    return parity_complex(p).real


def parity_ideal(p: SchemeParams) -> float:
    if p.scenario is not Scenario.IDEAL:
        p = replace(p, scenario=Scenario.IDEAL, transmissivity=1.0)
    return parity(p)


def parity_external(p: SchemeParams) -> float:
    if p.scenario is not Scenario.EXTERNAL:
        raise DomainError("parity_external needs an external-loss SchemeParams")
    return parity(p)


def parity_internal(p: SchemeParams) -> float:
    if p.scenario is not Scenario.INTERNAL:
        raise DomainError("parity_internal needs an internal-loss SchemeParams")
    return parity(p)


def richardson_derivative(f: Callable[[float], float], x: float, h: float) -> float:
    """Central difference at steps h and h/2, combined to cancel the h^2 term."""
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def parity_slope(p: SchemeParams, derivative_step: float = DEFAULT_DERIV_STEP) -> float:
    return richardson_derivative(lambda phi: parity(p.with_phi(phi)), p.phi, derivative_step)


def sensitivity(p: SchemeParams, derivative_step: float = DEFAULT_DERIV_STEP) -> float:
    """Error-propagation phase uncertainty sqrt(1 - <Pi>^2) / |d<Pi>/dphi|."""
    P = parity(p)
    slope = parity_slope(p, derivative_step)
    if abs(slope) < DERIVATIVE_FLOOR:
        raise DivergentSensitivityError(f"parity slope {slope:.3e} at phi={p.phi} is below {DERIVATIVE_FLOOR}")
    return math.sqrt(max((1 - P) * (1 + P), 0.0)) / abs(slope)


def tmsv_sensitivity(r: float, phi: float) -> float:
    """Closed-form sensitivity of the two-mode squeezed vacuum (n = 0, no loss)."""
    if not r > 0:
        raise DomainError("squeezing parameter must be > 0")
    cphi = math.cos(phi)
    if abs(cphi) < 1e-15:
        raise DivergentSensitivityError("cos(phi) = 0: parity signal is stationary")
    return omega0(r, phi) * math.cosh(r) ** 2 / (2 * math.tanh(r) * cphi)


def mean_total_photons(n: int, r: float) -> float:
    return 2 * n * math.cosh(2 * r) + 2 * math.sinh(r) ** 2


def r_for_energy(nbar: float, n: int) -> float:
    """Squeezing that gives total mean photon number nbar at order n."""
    if nbar < 2 * n:
        raise InfeasibleEnergyError(f"nbar={nbar} is below the minimum 2n={2 * n}")
    return 0.5 * math.acosh((nbar + 1) / (2 * n + 1))


def sql(nbar: float) -> float:
    return 1 / math.sqrt(nbar)


def hl(nbar: float) -> float:
    return 1 / nbar


def golden_section_minimize(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-6):
    """Golden-section search on [lo, hi]; returns (x, f(x)) once the bracket is below xtol."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def optimal_sensitivity_over_phi(
    p: SchemeParams,
    search_interval: tuple[float, float] = (1e-4, 1.0),
    derivative_step: float = DEFAULT_DERIV_STEP,
    grid_points: int = 64,
    xtol: float = 1e-6,
) -> tuple[float, float]:
    """Minimize sensitivity over phi: coarse grid, then golden section in the best cell.

    ``p.phi`` is ignored. Divergent points count as +inf.
    """
    lo, hi = search_interval
    if not lo < hi:
        raise DomainError("search interval must have lo < hi")

    def f(phi: float) -> float:
        try:
            return sensitivity(p.with_phi(phi), derivative_step)
        except DivergentSensitivityError:
            return math.inf

    grid = np.linspace(lo, hi, grid_points)
    values = np.array([f(x) for x in grid])
    if not np.isfinite(values).any():
        raise NoSignalError("sensitivity diverges at every grid point")
    i = int(np.argmin(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid_points - 1)]
    x, fx = golden_section_minimize(f, a, b, xtol)
    if values[i] < fx:
        return float(grid[i]), float(values[i])
    return float(x), float(fx)
