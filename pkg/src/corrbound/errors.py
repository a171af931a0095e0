"""Exception types shared across the package."""


class CorrBoundError(Exception):
    """Base class for all errors raised by corrbound."""


class NonConvergence(CorrBoundError, ArithmeticError):
    pass


class BadBracket(CorrBoundError, ValueError):
    pass


class NotDensityMatrix(CorrBoundError, ValueError):
    pass


class DimensionMismatch(CorrBoundError, ValueError):
    pass


class UnsupportedMode(CorrBoundError, ValueError):
    pass


class InternalInconsistency(CorrBoundError, AssertionError):
    """Two independent evaluation routes disagreed beyond tolerance."""


class InvalidN(CorrBoundError, ValueError):
    pass


class DimensionTooLarge(CorrBoundError, ValueError):
    pass


class TrotterDomainError(CorrBoundError, ValueError):
    pass


class NonPositiveDelta(CorrBoundError, ValueError):
    pass


class NonRectangularGrid(CorrBoundError, ValueError):
    pass


class ParseError(CorrBoundError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConversionError(CorrBoundError, ValueError):
    pass
