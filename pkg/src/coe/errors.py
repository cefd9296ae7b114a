"""Exception hierarchy.

Domain problems (bad arguments) derive from ``ValueError``; numerical
failures (non-convergence, precision loss) derive from ``ArithmeticError``.
The CLI maps the two families to distinct exit codes.
"""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """A denominator parameter is a non-positive integer."""


class RegionOfConvergenceError(DomainError):
    """Series arguments lie outside (or on the boundary of) the region of convergence."""


class NumericalError(ArithmeticError):
    """Base class for failures of a numerical procedure."""


class ConvergenceError(NumericalError):
    """A series or quadrature exhausted its budget before reaching tolerance."""


class PrecisionError(NumericalError):
    """Cancellation consumed more bits than the working precision allows."""
