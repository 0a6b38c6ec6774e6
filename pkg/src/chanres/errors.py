"""Exception types shared across the package."""


class ChanresError(Exception):
    """Base class for all package errors."""


class NonSquare(ChanresError):
    pass


class NotHermitian(ChanresError):
    pass


class NotPSD(ChanresError):
    pass


class NotUnitary(ChanresError):
    pass


class NoConvergence(ChanresError):
    pass


class DimensionMismatch(ChanresError):
    pass


class ValidationError(ChanresError):
    """Raised when an object fails one of its declared invariants.

    ``invariant`` names the violated invariant so batch tooling can report
    which check failed without parsing the message.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class Infeasible(ChanresError):
    """The feasibility phase of a convex solve failed."""


class MaxIterations(ChanresError):
    """Solver hit its iteration cap before certifying the requested gap.

    Carries the best (unconverged) solution found so far in ``best``.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class UnsupportedFreeSet(ChanresError):
    pass


class UnsupportedCombination(ChanresError):
    pass


class AssertionMismatch(ChanresError):
    """Two independent computations of the same quantity disagree."""
