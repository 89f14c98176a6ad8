"""
Biorthogonal states, evolution results and Berry-phase reports.
"""

from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.fock import FockSpace


def _frozen_vector(value) -> np.ndarray:
    array = np.array(value, dtype=np.complex128, copy=True)
    if array.ndim != 1:
        raise ValueError(f"expected a vector, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("state vector has non-finite components")
    array.setflags(write=False)
    return array


class BiorthogonalState(BaseModel):
    """Gauge-solution ket and its bra partner, both carrying exp(-i E_n t)."""

    ket: np.ndarray
    bra: np.ndarray
    label: int = Field(..., ge=0)
    time: float
    space: FockSpace

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("ket", "bra", mode="before")
    @classmethod
    def _vectors(cls, value) -> np.ndarray:
        return _frozen_vector(value)

    def pairing(self) -> complex:
        """<bra|ket> = conj(bra) . ket."""
        return complex(np.vdot(self.bra, self.ket))


class StepStats(BaseModel):
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0

    model_config = ConfigDict(frozen=True)


class EvolutionResult(BaseModel):
    """Trajectory of i dpsi/dt = H(t) psi; states are never renormalized."""

    times: List[float]
    states: List[np.ndarray]
    step_controller_stats: StepStats
    method: Literal["rk45", "midpoint"] = "rk45"
    # change of the lower half when the initial state loses its upper half
    truncation_sensitivity: float = 0.0

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("states", mode="before")
    @classmethod
    def _states(cls, value) -> List[np.ndarray]:
        return [_frozen_vector(state) for state in value]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(state) for state in self.states])


class PhaseReport(BaseModel):
    """Non-adiabatic Berry phase of level n by the closed form, the derivative-term quadrature and evolution."""

    gamma_closed: float
    gamma_quadrature: float
    gamma_evolution: float
    n: int = Field(..., ge=0)
    branch: Literal[1, -1]
    quadrature_imag_residual: float = 0.0
    evolution_raw: float = 0.0
    evolution_shift: int = 0

    model_config = ConfigDict(frozen=True)


class EvolutionPhase(BaseModel):
    """Total, dynamical and geometric phase from one evolved period."""

    total: float
    dynamical: float
    gamma: float
    raw: float
    shift: int
    cutoff: int

    model_config = ConfigDict(frozen=True)
