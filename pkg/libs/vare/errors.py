"""Domain errors for the vare toolkit.

Every error raised on purpose by the library derives from ``VareError`` so the
experiment harness can tell expected per-replication failures apart from bugs.
"""

from __future__ import annotations

from typing import Optional


class VareError(Exception):
    """Base class of all domain errors."""


class EmptyErosion(VareError, ValueError):
    """Raised when eroding a window would leave no interior."""


class UnknownModel(VareError, ValueError):
    """Raised for an unknown covariate model or process preset."""


class OutOfStencil(VareError, ValueError):
    """Raised when a 3x3 finite-difference stencil does not fit around a point."""


class BoundViolation(VareError, RuntimeError):
    """Raised when a thinning proposal bound is exceeded by the true intensity."""


class CholeskyFailure(VareError, RuntimeError):
    """Raised when the Gaussian field covariance cannot be factorised."""


class SingularSystem(VareError, RuntimeError):
    """Raised when the estimating-equation matrix is (numerically) singular."""


class Nonconvergence(VareError, RuntimeError):
    """Raised when Newton iterations hit the iteration cap."""


class Degenerate(VareError, ValueError):
    """Raised when the composite likelihood has no finite maximiser."""


class ParseError(VareError, ValueError):
    """Raised for malformed configs, pattern files and grid files."""

    def __init__(self, message: str, *, line: Optional[int] = None, field: Optional[str] = None) -> None:
        self.line = line
        self.field = field
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field '{field}'")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


__all__ = [
    "VareError",
    "EmptyErosion",
    "UnknownModel",
    "OutOfStencil",
    "BoundViolation",
    "CholeskyFailure",
    "SingularSystem",
    "Nonconvergence",
    "Degenerate",
    "ParseError",
]
