"""
Truncated matrix representations of the boson ladder, the SU(1,1) generators
Sz = (a^dag a + 1/2)/2, S+ = (a^dag)^2/2, S- = a^2/2 and the parity operator.
"""

import logging
from functools import lru_cache
from typing import Tuple

import numpy as np

from app.core.exceptions import DimensionMismatch
from app.models.fock import FockSpace, OperatorMatrix

logger = logging.getLogger(__name__)


def build_ladder(space: FockSpace) -> Tuple[OperatorMatrix, OperatorMatrix]:
    """Annihilation (sqrt(n+1) at (n, n+1)) and its conjugate transpose."""
    n = space.cutoff
    entries = np.zeros((n, n), dtype=np.complex128)
    index = np.arange(n - 1)
    entries[index, index + 1] = np.sqrt(index + 1.0)
    annihilation = OperatorMatrix(space=space, entries=entries)
    return annihilation, annihilation.dagger()


def build_su11(space: FockSpace) -> Tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    annihilation, creation = build_ladder(space)
    levels = np.arange(space.cutoff, dtype=np.float64)
    sz = OperatorMatrix(space=space, entries=np.diag((levels + 0.5) / 2.0))
    splus = 0.5 * (creation @ creation)
    sminus = 0.5 * (annihilation @ annihilation)
    return sz, splus, sminus


def number_operator(space: FockSpace) -> OperatorMatrix:
    return OperatorMatrix(space=space, entries=np.diag(np.arange(space.cutoff, dtype=np.float64)))


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    if a.space.cutoff != b.space.cutoff:
        raise DimensionMismatch(
            f"commutator of operators on cutoffs {a.space.cutoff} and {b.space.cutoff}"
        )
    return a @ b - b @ a


def parity_operator(space: FockSpace) -> OperatorMatrix:
    """diag((-1)^n); conjugation by it maps a -> -a."""
    signs = np.where(np.arange(space.cutoff) % 2 == 0, 1.0, -1.0)
    return OperatorMatrix(space=space, entries=np.diag(signs))


def basis_vector(n: int, space: FockSpace) -> np.ndarray:
    vector = np.zeros(space.cutoff, dtype=np.complex128)
    vector[n] = 1.0
    return vector


def commutator_residuals(space: FockSpace) -> dict:
    """Interior-block residuals of [a, a^dag] = 1 and the three SU(1,1) relations."""
    annihilation, creation = build_ladder(space)
    sz, splus, sminus = build_su11(space)
    identity = OperatorMatrix.identity(space)
    # [a, a^dag] = 1 fails only on the last diagonal entry
    ladder_block = space.cutoff - 1
    residuals = {
        "ladder": (commutator(annihilation, creation) - identity).interior_norm(ladder_block),
        "sz_splus": (commutator(sz, splus) - splus).interior_norm(),
        "sz_sminus": (commutator(sz, sminus) + sminus).interior_norm(),
        "splus_sminus": (commutator(splus, sminus) + 2.0 * sz).interior_norm(),
    }
    logger.debug(f"Commutator residuals on cutoff {space.cutoff}: {residuals}")
    return residuals


def parity_residuals(space: FockSpace) -> dict:
    """Pi a Pi + a, and Pi S Pi - S for the three generators."""
    parity = parity_operator(space)
    annihilation, _ = build_ladder(space)
    sz, splus, sminus = build_su11(space)
    return {
        "parity_ladder": (parity @ annihilation @ parity + annihilation).interior_norm(space.cutoff),
        "parity_sz": (parity @ sz @ parity - sz).interior_norm(space.cutoff),
        "parity_splus": (parity @ splus @ parity - splus).interior_norm(space.cutoff),
        "parity_sminus": (parity @ sminus @ parity - sminus).interior_norm(space.cutoff),
    }


@lru_cache(maxsize=32)
def su11_generators(space: FockSpace) -> Tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """Cached build_su11 for callers that rebuild H(t) many times on one space."""
    return build_su11(space)
