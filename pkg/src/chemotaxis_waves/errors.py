"""
Exception hierarchy for chemotaxis-waves.
"""

from typing import Any, List, Optional


class WaveError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(WaveError, ValueError):
    """Parameter outside the admissible domain."""


class SingularityError(WaveError, ValueError):
    """Evaluation at a singular point of a kernel."""


class ConvergenceError(WaveError):
    """Iterative solver did not converge."""

    def __init__(self, message: str, history: Optional[List[Any]] = None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class SlabTooShortError(WaveError):
    """Speed bracket endpoints do not straddle the normalization level."""

    def __init__(self, message: str, phi_lower: float, phi_upper: float):
        super().__init__(message)
        self.phi_lower = phi_lower
        self.phi_upper = phi_upper


class SingularInteriorPointError(WaveError):
    """c + v_x vanishes inside the left profile of a hyperbolic wave."""

    def __init__(self, message: str, location: float):
        super().__init__(message)
        self.location = location


class NoWaveError(WaveError):
    """No porous-medium traveling wave exists at the requested speed."""


class InsufficientResolutionError(WaveError):
    """Grid too coarse for a requested diagnostic."""


class ProfileFormatError(WaveError):
    """Malformed profile file."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnsupportedVersionError(ProfileFormatError):
    """Profile file written with an unsupported format version."""


class StudyError(WaveError):
    """A limit study failed part way; carries the partial report."""

    def __init__(self, message: str, partial: Any):
        super().__init__(message)
        self.partial = partial
