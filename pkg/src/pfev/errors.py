"""Exception types shared across the package."""

from __future__ import annotations


class NumericalError(RuntimeError):
    """A linear-algebra or numerical failure that survived the retry policy."""

    def __init__(self, message: str, attempted_jitters: tuple[float, ...] = ()):
        super().__init__(message)
        self.attempted_jitters = tuple(attempted_jitters)


class CellLimitError(NumericalError):
    """Raised when a region decomposition exceeds the configured cell budget."""


class ConfigError(ValueError):
    """Raised for invalid run configurations (maps to CLI exit code 2)."""
