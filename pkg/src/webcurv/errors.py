"""Exception types shared across the package."""


class WebCurvError(Exception):
    """Base class for all errors raised by webcurv."""


class ExprSyntaxError(WebCurvError):
    """Malformed expression source; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class WebFileError(WebCurvError):
    """Malformed .web file."""


class DivisionByNonUnit(WebCurvError):
    """A division met a denominator whose constant term is not invertible.

    For jet arithmetic this means the chosen base point sits on a pole or
    singular locus of the expression; the caller is expected to resample.
    """


class SingularAtPoint(WebCurvError):
    """A matrix that must be invertible is residue-singular at the base point."""


class OrderExhausted(WebCurvError):
    """A derivative was requested from a jet truncated at order 0."""
