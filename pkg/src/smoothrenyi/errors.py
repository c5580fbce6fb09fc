"""Exception hierarchy shared by every module."""


class SmoothRenyiError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SmoothRenyiError, ValueError):
    """Input data failed a structural check (masses, normalization, file schema)."""


class AlphabetMismatchError(ValidationError):
    """Two objects that must share an alphabet do not."""


class SupportError(ValidationError):
    """Supp(P) is not contained in Supp(Q)."""


class ParameterError(ValidationError):
    """A numeric parameter (eps, rate, trial count) lies outside its domain."""


class ResourceError(SmoothRenyiError):
    """A computation would exceed the configured memory budget."""
