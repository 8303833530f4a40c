"""Exception types shared across the package."""


class FracbridgeError(Exception):
    """Base class for all package errors."""


class DomainError(FracbridgeError, ValueError):
    """A parameter lies outside the stated domain of an operation."""


class PoleError(DomainError):
    """Gamma function evaluated at (or too close to) a non-positive integer."""


class GridError(FracbridgeError, ValueError):
    """A time grid violates a precondition (e.g. reaches the horizon T)."""


class DecompositionError(FracbridgeError, RuntimeError):
    """Covariance matrix could not be factorized within jitter tolerance."""


class EmbeddingError(FracbridgeError, RuntimeError):
    """Circulant embedding produced eigenvalues below the negative tolerance."""


class QuadratureError(FracbridgeError, RuntimeError):
    """A quadrature routine failed to produce a finite, converged value."""


class DegeneratePathError(FracbridgeError, ZeroDivisionError):
    """Estimator denominator vanished (degenerate observed path)."""


class ConfigError(FracbridgeError, ValueError):
    """An experiment configuration failed schema or domain validation."""
