"""Exception and warning types raised by shiftlab"""
from typing import Optional


class ShiftlabError(Exception):
    """Base class for all shiftlab errors"""


class PreconditionError(ShiftlabError, ValueError):
    """An operation was called with inputs violating its precondition"""


class DomainError(ShiftlabError, ValueError):
    """Input lies outside the mathematical domain of an operation"""


class FormatError(ShiftlabError, ValueError):
    """A matrix, function or config file could not be parsed"""


class EigenConvergenceError(ShiftlabError, ArithmeticError):
    """Jacobi iteration hit its sweep cap before the off-diagonal part vanished"""

    def __init__(self, sweeps: int, off_norm: float, threshold: float) -> None:
        self.sweeps = sweeps
        self.off_norm = off_norm
        self.threshold = threshold
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_norm!r} > {threshold!r})"
        )


class BranchCutWarning(UserWarning):
    """The unitary logarithm met an eigenvalue on the branch cut at -1"""

    def __init__(self, message: str, distance: Optional[float] = None) -> None:
        super().__init__(message)
        self.distance = distance
