"""
cycap - Exceptions
"""

from typing import Optional


class CycapError(Exception):
    """Base class for all cycap errors."""


class InstanceFormatError(CycapError, ValueError):
    """Malformed instance text; carries the offending line when known."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StructureError(CycapError, ValueError):
    """Invalid walk, alternating structure or patch request."""


class InvariantViolation(CycapError, RuntimeError):
    """An internal invariant did not hold."""


class NoGapError(CycapError, ValueError):
    """Gap closure requested for a run whose start tour was already optimal."""


class OracleSizeError(CycapError, ValueError):
    """Instance too large for the exact oracle."""
