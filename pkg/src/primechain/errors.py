"""Exception taxonomy shared by all primechain modules.

Every failure mode raised on purpose by the library maps to one of these
classes so the CLI can translate it into a machine-readable error record
and a stable exit code.
"""


class PrimechainError(Exception):
    """Base class for all errors raised deliberately by primechain."""


class DomainError(PrimechainError, ValueError):
    """An argument is outside the documented domain of an operation."""


class CapacityError(PrimechainError):
    """A request would exceed a configured size, depth or memory budget."""


class IntegrityError(PrimechainError):
    """A structural consistency check failed (e.g. a rebuilt chain element
    is composite)."""


class NumericalError(PrimechainError):
    """An iterative numerical routine failed to converge to tolerance."""


class InfeasibleError(PrimechainError):
    """No admissible parameter in the search region satisfies the
    feasibility condition (e.g. no grid point with contraction < 1)."""


class CensoringError(PrimechainError):
    """Too many Monte Carlo replicates were censored by the truncation cap
    for the requested estimate to be valid."""
