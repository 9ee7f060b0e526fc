"""
Custom exceptions for the simulator.
Every user-facing failure maps onto one of these classes and a CLI exit code.
"""

from typing import Any, Optional, Dict

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFICATION = 2


class SimulatorException(Exception):
    """Base exception for all simulator errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_VERIFICATION,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


# ==========================================
# VALIDATION ERRORS (exit 1)
# ==========================================

class ValidationError(SimulatorException):
    """Raised when input validation fails."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_VALIDATION,
            details=details
        )


class ParameterValidationError(ValidationError):
    """Raised when a model parameter violates an invariant."""

    def __init__(self, field: str, message: str):
        super().__init__(message=message, details={"field": field})
        self.field = field


class ConfigFileError(ValidationError):
    """Raised when the model file cannot be read or has unknown keys."""
    pass


class SweepSpecError(ValidationError):
    """Raised when a sweep definition is malformed."""
    pass


class DimensionCapError(ValidationError):
    """Raised when a requested matrix dimension exceeds the configured cap."""

    def __init__(self, message: str, dimension: int, cap: int):
        super().__init__(message=message, details={"dimension": dimension, "cap": cap})


# ==========================================
# VERIFICATION ERRORS (exit 2)
# ==========================================

class VerificationError(SimulatorException):
    """Raised when a numerical check exceeds its threshold."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_VERIFICATION,
            details=details
        )


class ClosedFormMismatchError(VerificationError):
    """Raised when a closed-form eigensystem disagrees with direct diagonalization."""
    pass


# ==========================================
# INTERNAL ERRORS (exit 2)
# ==========================================

class NumericalError(SimulatorException):
    """Raised when a numerical routine produces unusable output."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, exit_code=EXIT_VERIFICATION, details=details)


def error_response(exc: SimulatorException) -> Dict[str, Any]:
    """
    Create a standardized error payload from an exception.

    Args:
        exc: SimulatorException instance

    Returns:
        Dictionary with error details
    """
    return {
        "error": exc.__class__.__name__,
        "message": exc.message,
        "details": exc.details,
        "exit_code": exc.exit_code,
    }
