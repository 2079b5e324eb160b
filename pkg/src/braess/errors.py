"""Exception hierarchy shared by all modules."""


class BraessError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfig(BraessError, ValueError):
    pass


class ZeroOverZero(BraessError, ArithmeticError):
    """An extended-real quotient 0/0 was requested; there is no sensible value."""


class InvalidQ(BraessError, ValueError):
    pass


class NoCaseMatched(BraessError, AssertionError):
    """No equilibrium case guard fired. Indicates a bug, never bad user input."""


class TopologyError(BraessError, ValueError):
    def __init__(self, message: str, role: str | None = None):
        super().__init__(message)
        self.role = role


class BrokenPath(TopologyError):
    pass


class NotSymmetric(BraessError, ValueError):
    pass


class NoKKTPoint(BraessError, AssertionError):
    pass


class InfeasibleFlows(BraessError, ValueError):
    pass


class ConsistencyError(BraessError, AssertionError):
    """Two independent code paths disagreed."""
