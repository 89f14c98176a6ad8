"""
Typed errors raised by the numerical services.

Every error carries a stable ``error_code`` (echoed in reports) and the process
``exit_code`` the command line maps it to.
"""

from typing import Optional

from app.core.physics_config import (
    EXIT_INVALID_INPUT,
    EXIT_UNCERTIFIED,
    EXIT_VERIFICATION_FAILED,
)


class PTGaugeError(Exception):
    """Base class for all library errors."""

    error_code: str = "PTGAUGE_ERROR"
    exit_code: int = EXIT_INVALID_INPUT

    def __init__(self, detail: str, *, error_code: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        if error_code is not None:
            self.error_code = error_code


class DegenerateParameters(PTGaugeError):
    """omega + Omega = 0 and G = 0: the gauge angle is undefined."""

    error_code = "DEGENERATE_PARAMETERS"
    exit_code = EXIT_INVALID_INPUT


class NonNormalizable(PTGaugeError):
    """Kernel frequency is not positive, so no square-integrable eigenfunctions exist."""

    error_code = "NON_NORMALIZABLE"
    exit_code = EXIT_INVALID_INPUT


class IndexOutOfRange(PTGaugeError):
    error_code = "INDEX_OUT_OF_RANGE"
    exit_code = EXIT_INVALID_INPUT


class DimensionMismatch(PTGaugeError):
    error_code = "DIMENSION_MISMATCH"
    exit_code = EXIT_INVALID_INPUT


class CutoffNotConverged(PTGaugeError):
    """The auto-doubling policy hit the hard maximum without certifying the tail."""

    error_code = "CUTOFF_NOT_CONVERGED"
    exit_code = EXIT_UNCERTIFIED


class ExponentialDidNotConverge(PTGaugeError):
    error_code = "EXPONENTIAL_NOT_CONVERGED"
    exit_code = EXIT_UNCERTIFIED


class StepSizeUnderflow(PTGaugeError):
    error_code = "STEP_SIZE_UNDERFLOW"
    exit_code = EXIT_UNCERTIFIED


class QuadratureNotConverged(PTGaugeError):
    error_code = "QUADRATURE_NOT_CONVERGED"
    exit_code = EXIT_UNCERTIFIED


class CoefficientMismatch(PTGaugeError):
    """A transformed classical Hamiltonian coefficient differs from the kernel form."""

    error_code = "COEFFICIENT_MISMATCH"
    exit_code = EXIT_VERIFICATION_FAILED

    def __init__(self, detail: str, *, coefficient: str, value: complex, expected: complex):
        super().__init__(detail)
        self.coefficient = coefficient
        self.value = value
        self.expected = expected
