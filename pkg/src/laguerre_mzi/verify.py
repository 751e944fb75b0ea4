"""Oracle verification runs: closed forms against the truncated Fock simulator.

Each check reports its worst error over a small grid and the tolerance it is
held to. ``quick`` covers n <= 1, ``full`` covers n <= 3.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np

from . import __version__
from .closed_form import (
    SchemeParams,
    mean_total_photons,
    parity,
    physical_phase,
    sensitivity,
    tmsv_sensitivity,
)
from .fock import (
    DEFAULT_TAIL_TOL,
    build_laguerre_state,
    lossy_probe_family,
    mixed_state_qfi,
    mzi_identity_error,
    mzi_parity,
    photon_moments,
    probe_state,
    pure_state_qfi,
    select_cutoff,
    squeeze_by_expm,
)
from .qfi import QfiParams, cq_bound, gamma_opt, moments_closed_form, qfi_ideal, qfi_lossy

LEVELS = ("quick", "full")
R_VALUES = (0.3, 0.7, 1.0)
PHI_VALUES = (0.01, 0.05, 0.2, 0.5)
LOSS_T = (1.0, 0.95, 0.8)
GAMMA_GRID = np.linspace(-2.0, 1.0, 3001)
# second moments weight the truncated tail by N^2; a 1e-12 norm tail leaves ~1e-9
MOMENT_TAIL_TOL = 1e-16


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    passed: bool
    cases: int
    detail: str = ""


@dataclass
class VerifyReport:
    level: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "version": __version__,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def _check(name: str, errors, tolerance: float, detail: str = "") -> CheckResult:
    errors = [float(e) for e in errors]
    worst = max(errors) if errors else 0.0
    # NaN never passes
    ok = bool(errors) and all(e <= tolerance for e in errors)
    return CheckResult(name, worst, tolerance, ok, len(errors), detail)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def scenario_grid():
    """(scenario, transmissivity) pairs of the equivalence grid."""
    yield "ideal", 1.0
    for T in LOSS_T:
        yield "external", T
    for T in LOSS_T:
        yield "internal", T


def parity_errors_for(n: int, r: float, tail_tol: float = DEFAULT_TAIL_TOL) -> list:
    """|closed - oracle| over every phase and scenario at one (n, r)."""
    state = build_laguerre_state(n, r, tail_tol=tail_tol)
    out = []
    for phi in PHI_VALUES:
        for scenario, T in scenario_grid():
            closed = parity(SchemeParams(n, r, phi, scenario, T))
            oracle = mzi_parity(state, physical_phase(phi), scenario, T)
            out.append(abs(closed - oracle))
    return out


def _parity_task(args):
    return parity_errors_for(*args)


def check_parity_equivalence(n_max: int, workers: int = 1, tail_tol: float = DEFAULT_TAIL_TOL) -> CheckResult:
    tasks = [(n, r, tail_tol) for n, r in product(range(n_max + 1), R_VALUES)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_parity_task, tasks))
    else:
        chunks = [parity_errors_for(*t) for t in tasks]
    return _check("parity_equivalence", [e for c in chunks for e in c], 1e-8, f"n<={n_max}, oracle tail_tol {tail_tol:g}")


def check_lossless_reductions(n_max: int) -> list:
    errs = []
    for n, r, phi in product(range(n_max + 1), R_VALUES, PHI_VALUES):
        ideal = parity(SchemeParams(n, r, phi))
        errs.append(abs(parity(SchemeParams(n, r, phi, "external", 1.0)) - ideal))
        errs.append(abs(parity(SchemeParams(n, r, phi, "internal", 1.0)) - ideal))
    qerrs = [_rel(qfi_lossy(QfiParams(n, r, 1.0)), qfi_ideal(n, r)) for n, r in product(range(n_max + 1), R_VALUES)]
    return [
        _check("lossless_parity_reduction", errs, 1e-12),
        _check("lossless_qfi_reduction", qerrs, 1e-12, "relative"),
    ]


def check_mzi_identity() -> CheckResult:
    return _check("mzi_identity", [mzi_identity_error(phi, 8) for phi in (0.1, 0.7)], 1e-10, "operator norm, cutoff 8")


def check_state_properties(n_max: int) -> list:
    qfi_err, mom_err, energy_err, fid_err = [], [], [], []
    for n, r in product(range(n_max + 1), R_VALUES):
        state = build_laguerre_state(n, r, tail_tol=MOMENT_TAIL_TOL)
        qfi_err.append(_rel(pure_state_qfi(state), qfi_ideal(n, r)))
        k = np.arange(state.cutoff + 1)
        total = float(np.sum(np.abs(state.amplitudes) ** 2 * (k[:, None] + k[None, :])))
        energy_err.append(_rel(total, mean_total_photons(n, r)))
        expected = moments_closed_form(n, r)
        for sign in (1, -1):
            got = photon_moments(probe_state(n, r, MOMENT_TAIL_TOL, bs_sign=sign))
            mom_err.extend(_rel(g, e) for g, e in zip(got, expected))
        exact = build_laguerre_state(n, r, cutoff=max(40, select_cutoff(n, r)))
        vac = build_laguerre_state(n, 0.0, cutoff=exact.cutoff)
        fid_err.append(1 - exact.fidelity(squeeze_by_expm(vac, r)))
    return [
        _check("pure_state_qfi", qfi_err, 1e-8, "relative, 4 Var(J3) after BS1"),
        _check("moments", mom_err, 1e-10, "relative, both BS1 signs"),
        _check("energy", energy_err, 1e-10, "relative"),
        _check("construction_equivalence", fid_err, 1e-10, "1 - fidelity vs matrix exponential"),
    ]


def check_tmsv_reduction() -> CheckResult:
    errs = []
    for r in R_VALUES:
        for phi in np.linspace(0.01, 1.0, 100):
            errs.append(_rel(sensitivity(SchemeParams(0, r, float(phi))), tmsv_sensitivity(r, float(phi))))
        errs.append(_rel(tmsv_sensitivity(r, 0.0), 1 / math.sinh(2 * r)))
    return _check("tmsv_reduction", errs, 1e-8, "relative")


def check_gamma_optimality(n_max: int) -> CheckResult:
    errs = []
    for n, r, eta in product(range(n_max + 1), (0.3, 0.7, 1.0), (0.6, 0.8, 0.95)):
        p = QfiParams(n, r, eta)
        best = cq_bound(p, gamma_opt(p))
        grid = min(cq_bound(p, float(g)) for g in GAMMA_GRID)
        errs.append(max(best - grid, 0.0))
    return _check("gamma_optimality", errs, 1e-12, "C_Q(gamma_opt) - min over 3001-point grid")


def qfi_bound_gap(n: int, r: float, eta: float) -> float:
    """exact mixed-state QFI minus the variational bound (<= 0 when the bound holds)."""
    exact = mixed_state_qfi(lossy_probe_family(n, r, eta, cutoff=15), 0.3)
    return exact - qfi_lossy(QfiParams(n, r, eta))


def check_qfi_bound(level: str) -> CheckResult:
    cases = [(0, 0.5, 0.8)] if level == "quick" else list(product((0, 1), (0.3, 0.6), (0.6, 0.8)))
    gaps = [qfi_bound_gap(*c) for c in cases]
    return _check("qfi_bound", gaps, 1e-6, "exact F_Q - C_Q(gamma_opt), cutoff 15")


def run_verify(level: str = "quick", workers: int = 1, tail_tol: float = DEFAULT_TAIL_TOL) -> VerifyReport:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    n_max = 1 if level == "quick" else 3
    report = VerifyReport(level)
    report.checks.append(check_parity_equivalence(n_max, workers, tail_tol))
    report.checks.extend(check_lossless_reductions(n_max))
    report.checks.append(check_mzi_identity())
    report.checks.extend(check_state_properties(n_max))
    report.checks.append(check_tmsv_reduction())
    report.checks.append(check_gamma_optimality(n_max))
    report.checks.append(check_qfi_bound(level))
    return report
