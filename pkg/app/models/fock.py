"""
Truncated Fock space and dense operator matrices.
"""

from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.exceptions import DimensionMismatch


class FockSpace(BaseModel):
    """Basis |0>, ..., |cutoff-1> with the top ``boundary_margin`` states excluded from exactness checks."""

    cutoff: int = Field(..., ge=4)
    boundary_margin: int = Field(default=2, ge=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _margin_below_half(self) -> "FockSpace":
        if 2 * self.boundary_margin >= self.cutoff:
            raise ValueError(
                f"boundary_margin={self.boundary_margin} must be below cutoff/2={self.cutoff / 2}"
            )
        return self

    @property
    def interior(self) -> int:
        """Number of basis states on which truncated identities are asserted."""
        return self.cutoff - self.boundary_margin

    def with_cutoff(self, cutoff: int) -> "FockSpace":
        return FockSpace(cutoff=cutoff, boundary_margin=self.boundary_margin)


Scalar = Union[int, float, complex]


class OperatorMatrix(BaseModel):
    """Dense complex cutoff x cutoff matrix on a FockSpace. Entries are read-only."""

    space: FockSpace
    entries: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("entries", mode="before")
    @classmethod
    def _coerce_entries(cls, value) -> np.ndarray:
        array = np.array(value, dtype=np.complex128, copy=True)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError(f"operator entries must be square, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError("operator entries must be finite")
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _shape_matches_space(self) -> "OperatorMatrix":
        if self.entries.shape[0] != self.space.cutoff:
            raise ValueError(
                f"entries are {self.entries.shape[0]}x{self.entries.shape[0]} "
                f"but space cutoff is {self.space.cutoff}"
            )
        return self

    @classmethod
    def identity(cls, space: FockSpace) -> "OperatorMatrix":
        return cls(space=space, entries=np.eye(space.cutoff))

    @classmethod
    def zeros(cls, space: FockSpace) -> "OperatorMatrix":
        return cls(space=space, entries=np.zeros((space.cutoff, space.cutoff)))

    def _check_same_space(self, other: "OperatorMatrix") -> None:
        if other.space.cutoff != self.space.cutoff:
            raise DimensionMismatch(
                f"operator on cutoff {self.space.cutoff} combined with operator on cutoff {other.space.cutoff}"
            )

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check_same_space(other)
            return OperatorMatrix(space=self.space, entries=self.entries @ other.entries)
        vector = np.asarray(other)
        if vector.shape[0] != self.space.cutoff:
            raise DimensionMismatch(
                f"vector of length {vector.shape[0]} applied to operator on cutoff {self.space.cutoff}"
            )
        return self.entries @ vector

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_same_space(other)
        return OperatorMatrix(space=self.space, entries=self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_same_space(other)
        return OperatorMatrix(space=self.space, entries=self.entries - other.entries)

    def __neg__(self) -> "OperatorMatrix":
        return OperatorMatrix(space=self.space, entries=-self.entries)

    def __mul__(self, scalar: Scalar) -> "OperatorMatrix":
        return OperatorMatrix(space=self.space, entries=self.entries * scalar)

    __rmul__ = __mul__

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(space=self.space, entries=self.entries.conj().T)

    def conjugate(self) -> "OperatorMatrix":
        """Entrywise complex conjugation (the antiunitary K in the Fock basis)."""
        return OperatorMatrix(space=self.space, entries=self.entries.conj())

    def interior_block(self, size: int = None) -> np.ndarray:
        size = self.space.interior if size is None else size
        return self.entries[:size, :size]

    def crop(self, space: FockSpace) -> "OperatorMatrix":
        """Leading block on a smaller space."""
        if space.cutoff > self.space.cutoff:
            raise DimensionMismatch(f"cannot crop cutoff {self.space.cutoff} to {space.cutoff}")
        return OperatorMatrix(space=space, entries=self.entries[: space.cutoff, : space.cutoff])

    def interior_norm(self, size: int = None) -> float:
        """Largest absolute entry on the interior block."""
        block = self.interior_block(size)
        return float(np.max(np.abs(block))) if block.size else 0.0
