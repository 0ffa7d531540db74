"""Exception types raised by qcstretch operations."""


class QcsError(Exception):
    """Base class for all qcstretch errors."""


class ParseError(QcsError):
    """Config document could not be parsed."""


class ValidationError(QcsError, ValueError):
    """A constructor or loader invariant was violated; the message names it."""


class NonFiniteError(QcsError, ValueError):
    """Input contains NaN or Inf where finite values are required."""


class NoConvergenceError(QcsError, ArithmeticError):
    """Jacobi sweeps exceeded the cap; signals pathological input."""


class DegeneratePointError(QcsError, ValueError):
    """Evaluation point coincides with the stretch center (within guard)."""


class OnLambdaError(QcsError, ValueError):
    """Point lies on (or within guard of) a map center.

    ``index`` is the 1-based position of the offending center.
    """

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"point coincides with center n={index}")


class SpectrumOutOfRangeError(QcsError, ValueError):
    """Spectrum violates the nonnegative / unit-trace preconditions."""


class AllRungsDegenerateError(QcsError, ArithmeticError):
    """Every ladder rung was excluded (displacement underflow)."""


class IndexOutOfRangeError(QcsError, IndexError):
    """Center index outside 1..M."""
