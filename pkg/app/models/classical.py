"""
Classical complex phase-space types.
"""

import math
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class ComplexPhasePoint(BaseModel):
    x: complex
    p: complex
    t: float = 0.0

    model_config = ConfigDict(frozen=True)

    @field_validator("x", "p")
    @classmethod
    def _finite(cls, value: complex) -> complex:
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise ValueError("phase-space coordinates must be finite")
        return value


class ActionAngle(BaseModel):
    """Action I >= 0 and angle Theta reduced to [0, 2pi)."""

    I: float = Field(..., ge=0, allow_inf_nan=False)
    Theta: float = Field(..., allow_inf_nan=False)

    model_config = ConfigDict(frozen=True)

    @field_validator("Theta")
    @classmethod
    def _reduce(cls, value: float) -> float:
        reduced = math.fmod(value, 2.0 * math.pi)
        if reduced < 0.0:
            reduced += 2.0 * math.pi
        # fmod of a value just below 0 can round up to exactly 2pi
        return 0.0 if reduced >= 2.0 * math.pi else reduced


class KernelForm(BaseModel):
    """Coefficients of X^2, P^2 and XP in the transformed classical Hamiltonian."""

    x2: complex
    p2: complex
    xp: complex
    Gamma: float
    times: List[float]
    max_deviation: float

    model_config = ConfigDict(frozen=True)


class HannayResult(BaseModel):
    """Hannay angle by two routes and the correspondence with the Berry phase of level n."""

    dtheta_closed: float
    dtheta_quadrature: float
    correspondence_residual: float
    n: int = 0
    branch: Literal[1, -1] = -1
    gamma_n: Optional[float] = None
    realized_sign: int = -1
    imag_residual: float = 0.0
    linearity_residual: float = 0.0

    model_config = ConfigDict(frozen=True)


class ClassicalTrajectory(BaseModel):
    """Complexified trajectory of Hamilton's equations with its analytic cross-check."""

    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    analytic_endpoint: ComplexPhasePoint
    endpoint_residual: float
    kernel_invariant_drift: float

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
