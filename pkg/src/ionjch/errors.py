"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: domain and consistency problems exit 3,
solver and capacity failures exit 4.
"""


class IonJCHError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(IonJCHError, ValueError):
    """Input outside the region where a quantity is defined."""


class ConsistencyError(IonJCHError, ValueError):
    """Objects built for different systems were combined."""


class CapacityError(IonJCHError):
    """A requested Hilbert space exceeds the configured size cap."""


class SolverError(IonJCHError, RuntimeError):
    """An iterative procedure failed to converge.

    Attributes
    ----------
    residual : float
        Residual norm at the point the iteration gave up.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual
