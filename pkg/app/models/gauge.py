"""
Model parameters and the solved gauge of the driven SU(1,1) Hamiltonian.
"""

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ModelParams(BaseModel):
    """Omega, G and drive frequency omega (hbar = 1) plus the sign branch of the gauge angle."""

    Omega: float = Field(..., allow_inf_nan=False)
    G: float = Field(..., allow_inf_nan=False)
    omega: float = Field(..., gt=0, allow_inf_nan=False)
    branch: Literal[1, -1] = -1

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"Omega": 2.0, "G": 0.5, "omega": 1.0, "branch": -1}},
    )

    @property
    def epsilon(self) -> float:
        """omega + Omega."""
        return self.omega + self.Omega

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def phase(self, t: float) -> float:
        return self.omega * t

    def with_branch(self, branch: int) -> "ModelParams":
        return self.model_copy(update={"branch": branch})

    def mirrored(self) -> "ModelParams":
        return self.with_branch(-self.branch)


class GaugeSolution(BaseModel):
    """Solution of the auxiliary equation for one branch."""

    Delta: float = Field(..., gt=0)
    eta: float
    Gamma: float
    period: float = Field(..., gt=0)
    branch: Literal[1, -1]

    model_config = ConfigDict(frozen=True)

    @field_validator("eta")
    @classmethod
    def _eta_range(cls, value: float) -> float:
        if not -math.pi <= value <= math.pi:
            raise ValueError(f"eta={value} outside [-pi, pi]")
        return value

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def sin_eta(self) -> float:
        return math.sin(self.eta)

    @property
    def cos_eta(self) -> float:
        return math.cos(self.eta)

    @property
    def tau(self) -> float:
        """tan(eta/2), the coefficient of the disentangled transformation operator."""
        return math.tan(self.eta / 2.0)

    @property
    def normalizable(self) -> bool:
        """True when R^-1|n> is square-summable, i.e. cos(eta) > 0."""
        return self.cos_eta > 0.0


class KernelCoefficients(BaseModel):
    """H' = sz * Sz + l * (S+ e^{i phi} - S- e^{-i phi}) in the new gauge."""

    sz: float
    l: float

    model_config = ConfigDict(frozen=True)


class BCHResiduals(BaseModel):
    """Interior-block max-entry residuals of the three similarity relations and of i R dR^-1/dt."""

    splus: float
    sminus: float
    sz: float
    derivative: float

    model_config = ConfigDict(frozen=True)

    def max(self) -> float:
        return max(self.splus, self.sminus, self.sz, self.derivative)

    def as_dict(self) -> dict:
        return {
            "bch_splus": self.splus,
            "bch_sminus": self.sminus,
            "bch_sz": self.sz,
            "bch_derivative": self.derivative,
        }


class CutoffCertificate(BaseModel):
    """Outcome of the auto-doubling cutoff policy."""

    cutoff: int
    n_max: int
    tail: float
    converged: bool
    doublings: int = 0

    model_config = ConfigDict(frozen=True)
