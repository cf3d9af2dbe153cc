"""Exception types shared across the package.

The CLI maps these onto exit codes: DomainError and subclasses are
validation failures (exit 2), the numeric errors are exit 3, I/O is left
to the standard OSError hierarchy (exit 4).
"""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateInputError(DomainError):
    """Input data carries no usable information (e.g. zero interquartile range)."""


class NotPositiveDefiniteError(DomainError):
    """A matrix required to be positive definite is not."""


class NumericError(RuntimeError):
    """Base class for runtime numerical failures."""


class RankDeficiencyError(NumericError):
    """A Jacobian or weighting matrix is numerically rank deficient."""


class InsufficientConditioningError(NumericError):
    """Too few Monte Carlo points survive a conditioning event."""
