"""Exception hierarchy shared by the simulator modules."""


class NMSSEError(Exception):
    """Base class for all simulator errors."""


class ContractViolation(NMSSEError, ValueError):
    """An argument broke a documented precondition."""


class ConfigError(NMSSEError, ValueError):
    """Invalid run configuration (bad keys, non-positive dt, grid mismatch...)."""


class UnsupportedRegimeError(NMSSEError, ValueError):
    """A closed form was requested outside the regime where it holds."""


class DegenerateStateError(NMSSEError, ArithmeticError):
    """A state (or projection) has zero norm and cannot be normalized."""


class NodeError(DegenerateStateError):
    """A Bohmian trajectory reached a node of the guiding wave."""


class SingularityError(NMSSEError, ArithmeticError):
    """Ansatz coefficients exceeded the blow-up threshold (pole of A_z).

    ``t`` carries the time at which the threshold was crossed, when known.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class TrajectoryError(NMSSEError, RuntimeError):
    """One or more ensemble members failed; the ensemble is aborted."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
