"""Exception hierarchy.

Validation problems (bad filters, out-of-regime parameters) derive from
``ValidationError``; numerical breakdowns derive from ``NumericalError``.
The CLI maps the two families to exit codes 1 and 2.
"""


class FracwaveError(Exception):
    pass


class ValidationError(FracwaveError, ValueError):
    pass


class NumericalError(FracwaveError, ArithmeticError):
    pass


class NotAFilter(ValidationError):
    """Coefficients do not sum to zero."""


class AllMomentsVanish(ValidationError):
    """Every discrete moment up to the filter length vanishes."""


class DegenerateFilter(ValidationError):
    pass


class FilterTooLong(ValidationError):
    pass


class OutOfRegime(ValidationError):
    """Parameters outside the range where the requested quantity is defined."""


class DivergentSeries(OutOfRegime):
    pass


class TooLarge(ValidationError):
    """Direct summation would exceed the configured cost guard."""


class NotPSD(NumericalError):
    pass


class DegenerateVariance(NumericalError):
    pass


class DegenerateRatio(NumericalError):
    pass


class NotMonotone(NumericalError):
    """Moment function is not decreasing on the search bracket."""


class QuadratureNotConverged(NumericalError):
    pass
