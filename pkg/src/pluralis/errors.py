"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific one that applies rather than a bare Exception.
"""
from __future__ import annotations


class PluralisError(Exception):
    """Base class for package-specific failures."""


class ConfigError(PluralisError):
    """A config document failed validation.

    Carries the JSON path of the offending field so callers can point at it.
    """

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class GuardError(PluralisError):
    """A requested computation exceeds a hard enumeration bound."""


class DomainError(PluralisError):
    """An input is outside the mathematical domain of an operation."""


class FingerprintMismatchError(PluralisError):
    """A coverage set was paired with a different environment than it was built from."""
