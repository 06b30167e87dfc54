"""Exception types shared by every module of the package."""


class GCMError(Exception):
    """Base class for all errors raised by gcmbounds."""


class DomainError(GCMError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ConvergenceError(GCMError, ArithmeticError):
    """An iterative method, series or quadrature failed to meet its tolerance."""


class PrecisionError(GCMError, ArithmeticError):
    """Working precision was exhausted (a provably nonnegative quantity came out negative)."""
