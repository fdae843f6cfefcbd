"""
Exception hierarchy.
Every error carries a machine-readable code, a message, optional details and the
exit code the CLI reports for it.
"""
from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_NON_CONVERGENCE = 3


class CqSteinError(Exception):
    """Base class for all library errors."""

    exit_code: int = EXIT_INPUT_ERROR

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    @property
    def error(self) -> str:
        name = type(self).__name__
        return "".join(f"_{c.lower()}" if c.isupper() else c for c in name).lstrip("_")

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.error, "message": self.message, "details": self.details or None}


# ============== Input validation ==============

class InputError(CqSteinError):
    """Malformed file or argument."""


class NotHermitian(CqSteinError):
    pass


class NotPSD(CqSteinError):
    pass


class TraceMismatch(CqSteinError):
    pass


class DimensionMismatch(CqSteinError):
    pass


class ShapeMismatch(CqSteinError):
    pass


class AlphaOutOfRange(CqSteinError):
    pass


class EpsOutOfRange(CqSteinError):
    pass


class SupportViolation(CqSteinError):
    pass


class UnsupportedSetKind(CqSteinError):
    pass


class UnsupportedDimension(CqSteinError):
    pass


class EnumerationTooLarge(CqSteinError):
    pass


class DimensionGuard(CqSteinError):
    pass


class InfiniteRobustness(CqSteinError):
    pass


class BracketTooWide(CqSteinError):
    pass


class PreconditionViolated(CqSteinError):
    pass


# ============== Iterative solvers ==============

class ConvergenceFailure(CqSteinError):
    """Hypothesis-test bisection did not certify its duality gap."""

    exit_code = EXIT_NON_CONVERGENCE


class NonConvergence(CqSteinError):
    """Blahut-Arimoto or projected-gradient iteration cap reached."""

    exit_code = EXIT_NON_CONVERGENCE


# ============== Checks ==============

class CheckFailed(CqSteinError):
    """A verified identity or inequality did not hold."""

    exit_code = EXIT_CHECK_FAILED
