"""Exception hierarchy shared by all modules."""


class CcdfexError(Exception):
    """Base class for domain errors raised by the package."""


class ConvergenceError(CcdfexError):
    """A numerical routine did not reach its requested tolerance."""


class DegenerateConditioningError(CcdfexError, ValueError):
    """The conditioning event has zero (or numerically negligible) probability."""


class UnavailableError(CcdfexError, NotImplementedError):
    """A model does not provide the requested capability (sampler, pdf, ...)."""
