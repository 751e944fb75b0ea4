"""Exception types raised by the library."""


class LaguerreMziError(Exception):
    """Base class for all library errors."""


class DomainError(LaguerreMziError, ValueError):
    """A parameter lies outside the domain where the quantity is defined."""


class TruncationError(LaguerreMziError):
    """The requested Fock cutoff cannot meet the truncation tolerance."""


class DimensionError(LaguerreMziError, ValueError):
    """Mismatched or insufficient array / series dimensions."""


class InvalidDensityError(LaguerreMziError, ValueError):
    """A density matrix is not Hermitian, not positive, or has bad trace."""


class DivergentSensitivityError(LaguerreMziError):
    """The parity signal is stationary, so the error-propagation sensitivity diverges."""


class NoSignalError(LaguerreMziError):
    """Every candidate phase in a search produced a divergent sensitivity."""


class InfeasibleEnergyError(DomainError):
    """The requested mean photon number is below the minimum 2n of the family."""


class UsageError(LaguerreMziError, ValueError):
    """Invalid sweep specification or command-line usage."""
