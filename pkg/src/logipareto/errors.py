"""Exception types shared across the package."""

from __future__ import annotations

from .quadrature import QuadratureError

__all__ = [
    "ParameterError",
    "DomainError",
    "StructureError",
    "ConfigurationError",
    "NonConvergenceError",
    "IdentityNotFound",
    "QuadratureError",
]


class ParameterError(ValueError):
    """A distribution or model parameter is outside its allowed range."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class StructureError(ValueError):
    """A random expression is malformed (sign, depth or independence)."""


class ConfigurationError(ValueError):
    """Mutually inconsistent settings, e.g. the wrong shift law for an equation."""


class IdentityNotFound(KeyError):
    """Unknown catalog identifier."""


class NonConvergenceError(ArithmeticError):
    """An iteration diverged or stalled; ``trace`` holds the history."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
