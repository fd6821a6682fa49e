"""Exception types raised by the library."""

from __future__ import annotations


class OrbijacError(RuntimeError):
    pass


class PrecisionError(OrbijacError):
    """A coefficient at or beyond the tracked q-precision was requested."""


class NotInvertibleError(OrbijacError, ZeroDivisionError):
    pass


class GroebnerError(OrbijacError):
    pass


class NonIsolatedSingularityError(OrbijacError):
    pass


class InvarianceError(OrbijacError):
    pass


class InternalDivisionError(OrbijacError):
    """Synthetic division by (t_j - s_j) left a remainder; this is a bug."""


class MatrixFactorizationError(OrbijacError):
    def __init__(self, message: str, entry: tuple[int, int] | None = None):
        super().__init__(message)
        self.entry = entry


class ProblemError(OrbijacError):
    def __init__(self, message: str, violations: list[dict] | None = None):
        super().__init__(message)
        self.violations = violations or []


class UsageError(OrbijacError, ValueError):
    """Bad command-line input: unknown command, missing flag, malformed group element."""
