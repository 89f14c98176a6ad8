"""
Pydantic schemas for run configurations and emitted report records.
"""

from typing import Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings
from app.core.physics_config import EXIT_SUCCESS, SWEEPABLE_PARAMETERS, SWEEP_QUANTITIES
from app.models.fock import FockSpace
from app.models.gauge import ModelParams

InputValue = Union[bool, int, float, str, None]


class SweepGrid(BaseModel):
    """Evenly spaced grid over one model parameter."""

    parameter: Literal["omega-cap", "g", "drive"]
    start: float = Field(..., allow_inf_nan=False)
    stop: float = Field(..., allow_inf_nan=False)
    steps: int = Field(..., ge=2)
    quantity: str = "gamma_closed"

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _known_quantity(self) -> "SweepGrid":
        if self.quantity not in SWEEP_QUANTITIES:
            raise ValueError(f"unknown sweep quantity {self.quantity!r}; choose from {SWEEP_QUANTITIES}")
        return self

    @property
    def field(self) -> str:
        return SWEEPABLE_PARAMETERS[self.parameter]

    def values(self) -> List[float]:
        return [float(value) for value in np.linspace(self.start, self.stop, self.steps)]


class RunConfig(BaseModel):
    """Everything one command invocation needs, after merging the config file under the flags."""

    params: ModelParams
    n: int = Field(default=0, ge=0)
    n_max: int = Field(default=3, ge=1)
    cutoff: int = Field(default_factory=lambda: settings.default_cutoff, ge=4)
    boundary_margin: int = Field(default_factory=lambda: settings.boundary_margin, ge=0)
    cutoff_policy: Literal["auto", "fixed"] = Field(default_factory=lambda: settings.cutoff_policy)
    tol_ode: float = Field(default_factory=lambda: settings.ode_rtol, gt=0)
    tol_quad: float = Field(default_factory=lambda: settings.quad_tolerance, gt=0)
    tol_assert: float = Field(default_factory=lambda: settings.assertion_tolerance, gt=0)
    periods: float = Field(default=1.0, gt=0)
    samples: int = Field(default=9, ge=2)
    sweep: Optional[SweepGrid] = None
    format: Literal["text", "csv", "json"] = "text"
    out: Optional[str] = None
    inject_fault: bool = False

    model_config = ConfigDict(frozen=True)

    @property
    def space(self) -> FockSpace:
        return FockSpace(cutoff=self.cutoff, boundary_margin=self.boundary_margin)

    def with_params(self, params: ModelParams) -> "RunConfig":
        return self.model_copy(update={"params": params})

    def echo(self) -> Dict[str, InputValue]:
        """Inputs echoed into every record."""
        inputs: Dict[str, InputValue] = {
            "Omega": self.params.Omega,
            "G": self.params.G,
            "omega": self.params.omega,
            "branch": self.params.branch,
            "n": self.n,
            "nmax": self.n_max,
            "cutoff": self.cutoff,
            "margin": self.boundary_margin,
            "cutoff_policy": self.cutoff_policy,
        }
        if self.inject_fault:
            inputs["inject_fault"] = True
        return inputs

    def tolerances(self) -> Dict[str, float]:
        return {"ode": self.tol_ode, "quadrature": self.tol_quad, "assertion": self.tol_assert}


class ErrorDetail(BaseModel):
    """Error attached to a record."""

    detail: str
    error_code: Optional[str] = None
    exit_code: int = 2

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "detail": "tail 3.1e-05 >= 1e-10 for n<=0 at the largest allowed cutoff 1024",
                "error_code": "CUTOFF_NOT_CONVERGED",
                "exit_code": 3,
            }
        }
    )


class Provenance(BaseModel):
    branch: int
    cutoff: Optional[int] = None
    cutoff_certified: Optional[bool] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)
    app_version: str = Field(default_factory=lambda: settings.app_version)
    notes: List[str] = Field(default_factory=list)


class ReportRecord(BaseModel):
    """One emitted result: echoed inputs, derived gauge quantities, outputs and their tolerance flags."""

    command: str
    inputs: Dict[str, InputValue]
    derived: Dict[str, Optional[float]] = Field(default_factory=dict)
    outputs: Dict[str, Optional[float]] = Field(default_factory=dict)
    tolerance_met: Dict[str, bool] = Field(default_factory=dict)
    provenance: Provenance
    errors: List[ErrorDetail] = Field(default_factory=list)

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "command": "berry",
                "inputs": {"Omega": 2.0, "G": 0.5, "omega": 1.0, "branch": -1, "n": 0},
                "derived": {"Delta": 3.1622776601683795, "eta": -0.3217505543966422, "Gamma": 1.0811388300841898},
                "outputs": {"gamma_closed": 0.0806080869},
                "tolerance_met": {"gamma_closed": True},
                "provenance": {"branch": -1, "cutoff": 64},
                "errors": [],
            }
        }
    )

    @model_validator(mode="after")
    def _every_output_flagged(self) -> "ReportRecord":
        missing = set(self.outputs) - set(self.tolerance_met)
        if missing:
            raise ValueError(f"outputs without a tolerance flag: {sorted(missing)}")
        return self

    @property
    def certified(self) -> bool:
        return all(self.tolerance_met.values())

    def exit_code(self, failure_code: int) -> int:
        """First attached error's code, else ``failure_code`` if any flag is false, else success."""
        if self.errors:
            return self.errors[0].exit_code
        return EXIT_SUCCESS if self.certified else failure_code
