"""Exception types shared across the package."""


class RidgeflowError(Exception):
    """Base class for package-specific failures."""


class NumericalError(RidgeflowError):
    """Raised when a computation produces non-finite values, blows up,
    or cannot proceed for numerical reasons (e.g. gradient of the zero
    tensor)."""


class FormatError(RidgeflowError):
    """Raised when a container file cannot be parsed."""
