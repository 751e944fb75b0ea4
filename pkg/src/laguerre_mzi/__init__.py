"""Phase estimation with a Mach-Zehnder interferometer fed by S(r)|n,n>.

Closed-form parity signals, sensitivities and Fisher information, checked
against a brute-force truncated Fock-space simulator.
"""

__version__ = "0.1.0"

from .closed_form import (  # noqa: E402
    Scenario,
    SchemeParams,
    hl,
    mean_total_photons,
    optimal_sensitivity_over_phi,
    parity,
    parity_external,
    parity_ideal,
    parity_internal,
    physical_phase,
    r_for_energy,
    sensitivity,
    sql,
    tmsv_sensitivity,
)
from .qfi import MomentSet, QfiParams, cq_bound, gamma_opt, moments_closed_form, qcrb, qfi_ideal, qfi_lossy  # noqa: E402

__all__ = [
    "MomentSet",
    "QfiParams",
    "Scenario",
    "SchemeParams",
    "cq_bound",
    "gamma_opt",
    "hl",
    "mean_total_photons",
    "moments_closed_form",
    "optimal_sensitivity_over_phi",
    "parity",
    "parity_external",
    "parity_ideal",
    "parity_internal",
    "physical_phase",
    "qcrb",
    "qfi_ideal",
    "qfi_lossy",
    "r_for_energy",
    "sensitivity",
    "sql",
    "tmsv_sensitivity",
]
