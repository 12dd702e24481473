"""Exception hierarchy shared by all pipeline stages."""

import numpy as np


class VolisingError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(VolisingError, ValueError):
    """An input violates a documented precondition."""


class ParseError(ValidationError):
    """A line of tick input could not be parsed."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class EmptyDatasetError(VolisingError):
    """Every stock was removed, nothing is left to analyse."""


class SingularMatrixError(VolisingError, np.linalg.LinAlgError):
    """The equal-time correlation matrix cannot be inverted reliably."""

    def __init__(self, cond, bound, lam):
        self.cond = cond
        self.bound = bound
        self.lam = lam
        super().__init__(
            f"correlation matrix is singular or ill-conditioned "
            f"(condition estimate {cond:.3g} > {bound:.3g} at lambda={lam:g}); "
            f"retry with a ridge term, e.g. lambda=1e-3"
        )


class UndefinedSimilarityError(VolisingError, ArithmeticError):
    """Both coupling matrices vanish off the diagonal."""
