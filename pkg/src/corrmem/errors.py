"""Exceptions shared across the package."""

__all__ = ["ValidationError", "ResourceLimitError", "EnumerationLimitError"]


class ValidationError(ValueError):
    """A model specification or a parameter failed validation."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed a documented resource budget."""


class EnumerationLimitError(ResourceLimitError):
    """An exact computation would enumerate more states than allowed."""
