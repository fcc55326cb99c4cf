"""Exception hierarchy shared by every module of the package."""


class SwiptError(Exception):
    """Base class for all errors raised by :mod:`swipt_opt`."""


class DimensionError(SwiptError, ValueError):
    """A matrix or vector has an invalid shape."""


class DomainError(SwiptError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class DegenerateChannelError(SwiptError, ValueError):
    """The channel matrix is numerically zero."""


class InfeasibleRateError(SwiptError):
    """The requested rate cannot be met by any admissible transmit strategy."""


class NumericalBracketError(SwiptError, RuntimeError):
    """A bracketing root finder found no sign change where one was expected."""


class ApproximationInapplicableError(SwiptError):
    """A high-SNR approximation has no solution for the given instance.

    The exact solvers in ``swipt_opt.solver`` still apply; callers wanting a
    result regardless should retry with them.
    """


class OutputError(SwiptError, OSError):
    """Writing an output artifact failed."""
