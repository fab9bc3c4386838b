"""Exception types shared across the package."""


class WoeboxError(Exception):
    """Base class for package errors."""


class LikelihoodUnavailableError(WoeboxError):
    """Raised when a likelihood query hits a model that cannot answer it.

    Opaque predictors expose only ``predict``; evidence computations for
    them must go through a fitted surrogate instead.
    """


class DegenerateModelError(WoeboxError):
    """Fitting produced (or would produce) an unusable model."""
