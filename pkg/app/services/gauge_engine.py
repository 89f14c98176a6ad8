"""
Generalized gauge transformation of the driven PT-symmetric SU(1,1) Hamiltonian

    H(t) = Omega Sz + G (S+ e^{i phi} - S- e^{-i phi}),   phi = omega t,

by the Hermitian, non-unitary R(t) = exp(-(eta/2)(S+ e^{i phi} + S- e^{-i phi})),
which maps it onto the static kernel H' = 2 Gamma Sz.

R(t) is built in disentangled form

    R^{-+1} = exp(+-tau e^{i phi} S+) cos(eta/2)^{-2 Sz} exp(+-tau e^{-i phi} S-),  tau = tan(eta/2),

whose truncated factors reproduce the entries of the infinite-dimensional
operator exactly on every kept row and column. Products such as R H R^-1 are
only exact on a low block; certify_space picks a working cutoff on which the
columns R^{+-1}|n> have negligible weight in the upper half of the basis.
"""

import logging
import math
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
from scipy.linalg import eigh, eigvals
from scipy.special import gammaln

from app.core.config import settings
from app.core.exceptions import (
    CutoffNotConverged,
    DegenerateParameters,
    ExponentialDidNotConverge,
    IndexOutOfRange,
    NonNormalizable,
)
from app.models.fock import FockSpace, OperatorMatrix
from app.models.gauge import (
    BCHResiduals,
    CutoffCertificate,
    GaugeSolution,
    KernelCoefficients,
    ModelParams,
)
from app.services.fock_algebra import parity_operator, su11_generators
from app.services.numerics import richardson_central_difference

logger = logging.getLogger(__name__)

# Factors of the disentangled product are clipped above e^LOG_CAP so that a
# product of three stays inside double range.
LOG_CAP = 230.0

CutoffPolicy = Literal["auto", "fixed"]
ExponentialMethod = Literal["ordered", "eigh"]
DerivativeMethod = Literal["closed", "analytic", "finite-difference"]


# Auxiliary equation
# ==================

def solve_auxiliary(params: ModelParams) -> GaugeSolution:
    """Solve G cos(eta) + ((omega+Omega)/2) sin(eta) = 0 on the requested branch.

    sin(eta) = branch 2G/Delta, cos(eta) = -branch (omega+Omega)/Delta and
    Gamma = -(branch Delta + omega)/2.
    """
    epsilon = params.epsilon
    delta = math.hypot(epsilon, 2.0 * params.G)
    if delta == 0.0:
        raise DegenerateParameters(
            f"omega + Omega = 0 and G = 0 (Omega={params.Omega}, omega={params.omega}): "
            "the gauge angle is undefined"
        )
    b = params.branch
    # + 0.0 folds a signed zero so eta = pi rather than -pi on the G = 0 mirror branch
    sin_eta = b * 2.0 * params.G / delta + 0.0
    cos_eta = -b * epsilon / delta
    eta = math.atan2(sin_eta, cos_eta)
    gamma = -(b * delta + params.omega) / 2.0
    return GaugeSolution(Delta=delta, eta=eta, Gamma=gamma, period=params.period, branch=b)


def auxiliary_residual(params: ModelParams, gauge: GaugeSolution) -> float:
    return abs(params.G * gauge.cos_eta + 0.5 * params.epsilon * gauge.sin_eta)


def kernel_coefficients(params: ModelParams, gauge: GaugeSolution) -> KernelCoefficients:
    """Closed-form coefficients of Sz and of S+ e^{i phi} - S- e^{-i phi} in the new gauge."""
    sin_eta, cos_eta = gauge.sin_eta, gauge.cos_eta
    half_sin_sq = math.sin(gauge.eta / 2.0) ** 2
    sz = params.Omega * cos_eta - 2.0 * params.G * sin_eta - 2.0 * params.omega * half_sin_sq
    l = params.G * cos_eta + 0.5 * params.epsilon * sin_eta
    return KernelCoefficients(sz=sz, l=l)


def spectrum(gauge: GaugeSolution, n_max: int) -> List[float]:
    """E_n = (n + 1/2) Gamma for n = 0 .. n_max - 1."""
    if n_max < 1:
        raise IndexOutOfRange(f"n_max must be at least 1, got {n_max}")
    return [(n + 0.5) * gauge.Gamma for n in range(n_max)]


# Operators
# =========

def build_hamiltonian(params: ModelParams, t: float, space: FockSpace) -> OperatorMatrix:
    sz, splus, sminus = su11_generators(space)
    phase = np.exp(1j * params.phase(t))
    entries = params.Omega * sz.entries + params.G * (
        splus.entries * phase - sminus.entries * np.conj(phase)
    )
    return OperatorMatrix(space=space, entries=entries)


def _raising_log_factors(rows: int, cols: int, coefficient: complex) -> Tuple[np.ndarray, np.ndarray]:
    """log|.| and phase of exp(c S+)[i, m] = c^j (S+^j)[m+2j, m] / j!, i = m + 2j, on a rows x cols block."""
    i = np.arange(rows)[:, None]
    m = np.arange(cols)[None, :]
    steps = i - m
    valid = (steps >= 0) & (steps % 2 == 0)
    j = np.where(valid, steps // 2, 0)
    logmag = np.full((rows, cols), -np.inf)
    phase = np.ones((rows, cols), dtype=np.complex128)
    if coefficient == 0:
        logmag = np.where(np.broadcast_to(i == m, (rows, cols)), 0.0, -np.inf)
        return logmag, phase
    magnitude = abs(coefficient)
    unit = coefficient / magnitude
    values = (
        j * math.log(magnitude)
        - gammaln(j + 1.0)
        - j * math.log(2.0)
        + 0.5 * (gammaln(m + 2.0 * j + 1.0) - gammaln(m + 1.0))
    )
    logmag = np.where(valid, values, -np.inf)
    phase = np.where(valid, unit ** j, 1.0)
    return logmag, phase


def _clip(logmag: np.ndarray, phase: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Exponentiate, zeroing entries above e^LOG_CAP; returns (values, clipped mask)."""
    clipped = logmag > LOG_CAP
    safe = np.where(clipped | np.isneginf(logmag), -np.inf, logmag)
    return np.exp(safe) * phase, clipped


def _diagonal_log(angle: float, size: int) -> np.ndarray:
    # cos(angle/2)^{-(n + 1/2)}
    return -(np.arange(size) + 0.5) * math.log(math.cos(angle / 2.0))


def _ordered_coefficients(tau: float, phi: float, inverse: bool) -> Tuple[complex, complex]:
    sign = 1.0 if inverse else -1.0
    return sign * tau * np.exp(1j * phi), sign * tau * np.exp(-1j * phi)


def _disentangled_factors(
    raise_coeff: complex, sz_exponent: complex, lower_coeff: complex, space: FockSpace
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = space.cutoff
    left, left_clipped = _clip(*_raising_log_factors(n, n, raise_coeff))
    right, right_clipped = _clip(*_raising_log_factors(n, n, lower_coeff))
    levels = np.arange(n) + 0.5
    b = complex(sz_exponent)
    diag, diag_clipped = _clip(b.real * levels / 2.0, np.exp(0.5j * b.imag * levels))

    interior = space.interior
    if (
        left_clipped[:interior].any()
        or right_clipped[:interior].any()
        or diag_clipped[:interior].any()
    ):
        raise ExponentialDidNotConverge(
            f"disentangled factors exceed double range inside the interior block "
            f"(a={complex(raise_coeff):.4g}, b={b:.4g}, c={complex(lower_coeff):.4g}, cutoff={n})"
        )
    if left_clipped.any() or right_clipped.any() or diag_clipped.any():
        logger.warning(f"Dropped out-of-range boundary entries of a disentangled operator (cutoff={n})")
    return left, diag, right


def disentangled_operator(
    raise_coeff: complex, sz_exponent: complex, lower_coeff: complex, space: FockSpace
) -> OperatorMatrix:
    """exp(a S+) exp(b Sz) exp(c S-) with every kept entry equal to that of the untruncated operator.

    Each entry (i, m) is a finite sum over intermediate levels k <= min(i, m).
    """
    left, diag, right = _disentangled_factors(raise_coeff, sz_exponent, lower_coeff, space)
    # exp(c S-) is the transpose of exp(c S+)
    entries = (left * diag[None, :]) @ right.T
    return OperatorMatrix(space=space, entries=entries)


def apply_disentangled(
    raise_coeff: complex, sz_exponent: complex, lower_coeff: complex, vector: np.ndarray, space: FockSpace
) -> np.ndarray:
    """exp(a S+) exp(b Sz) exp(c S-) applied to a vector, factor by factor."""
    left, diag, right = _disentangled_factors(raise_coeff, sz_exponent, lower_coeff, space)
    return left @ (diag * (right.T @ vector))


def _ordered_matrix(angle: float, phi: float, space: FockSpace, inverse: bool) -> OperatorMatrix:
    """exp(-+(angle/2)(S+ e^{i phi} + S- e^{-i phi})) in disentangled form."""
    raise_coeff, lower_coeff = _ordered_coefficients(math.tan(angle / 2.0), phi, inverse)
    sz_exponent = -2.0 * math.log(math.cos(angle / 2.0))
    return disentangled_operator(raise_coeff, sz_exponent, lower_coeff, space)


def _eigh_pair(gauge: GaugeSolution, phi: float, space: FockSpace) -> Tuple[OperatorMatrix, OperatorMatrix]:
    _, splus, sminus = su11_generators(space)
    exponent = -(gauge.eta / 2.0) * (splus.entries * np.exp(1j * phi) + sminus.entries * np.exp(-1j * phi))
    exponent = 0.5 * (exponent + exponent.conj().T)
    values, vectors = eigh(exponent)
    spread = float(values.max() - values.min()) if values.size else 0.0
    condition = math.exp(min(spread, 700.0))
    estimate = np.finfo(float).eps * condition
    if estimate > settings.expm_tolerance:
        raise ExponentialDidNotConverge(
            f"eigendecomposition of the exponent of R is ill-conditioned: "
            f"error estimate {estimate:.3g} > {settings.expm_tolerance:g} at cutoff {space.cutoff}"
        )
    r = (vectors * np.exp(values)[None, :]) @ vectors.conj().T
    r_inv = (vectors * np.exp(-values)[None, :]) @ vectors.conj().T
    return OperatorMatrix(space=space, entries=r), OperatorMatrix(space=space, entries=r_inv)


def build_R(
    gauge: GaugeSolution,
    params: ModelParams,
    t: float,
    space: FockSpace,
    method: ExponentialMethod = "ordered",
) -> Tuple[OperatorMatrix, OperatorMatrix]:
    """R(t) and R^-1(t) on ``space``.

    ``ordered`` gives exact operator entries; ``eigh`` exponentiates the truncated
    Hermitian exponent and is limited by its conditioning.
    """
    phi = params.phase(t)
    if method == "ordered" and math.cos(gauge.eta / 2.0) < 1e-8:
        logger.info(f"eta={gauge.eta:.6g} is at the disentangling singularity, using eigendecomposition")
        method = "eigh"
    if method == "eigh":
        return _eigh_pair(gauge, phi, space)
    return (
        _ordered_matrix(gauge.eta, phi, space, inverse=False),
        _ordered_matrix(gauge.eta, phi, space, inverse=True),
    )


def build_metric(gauge: GaugeSolution, params: ModelParams, t: float, space: FockSpace) -> OperatorMatrix:
    """chi = R^2 = exp(-eta (S+ e^{i phi} + S- e^{-i phi})), disentangled at angle 2 eta.

    Entries are exact; the disentangled form exists only while cos(eta) > 0.
    """
    if not gauge.normalizable:
        raise NonNormalizable(
            f"cos(eta)={gauge.cos_eta:.6g} <= 0: R^2 has no disentangled form and the metric is unbounded"
        )
    return _ordered_matrix(2.0 * gauge.eta, params.phase(t), space, inverse=False)


def transformation_column(
    gauge: GaugeSolution,
    params: ModelParams,
    t: float,
    n: int,
    space: FockSpace,
    inverse: bool,
) -> np.ndarray:
    """R^{-1}(t)|n> (inverse=True) or R(t)|n> without building the full matrix."""
    if not 0 <= n < space.cutoff:
        raise IndexOutOfRange(f"level {n} outside cutoff {space.cutoff}")
    raise_coeff, lower_coeff = _ordered_coefficients(gauge.tau, params.phase(t), inverse)
    # exp(c S-)|n> lives on levels m <= n of the same parity
    lower_log, lower_phase = _raising_log_factors(n + 1, n + 1, lower_coeff)
    right, _ = _clip(lower_log[n, :], lower_phase[n, :])
    diag, _ = _clip(_diagonal_log(gauge.eta, n + 1), np.ones(n + 1, dtype=np.complex128))
    left_log, left_phase = _raising_log_factors(space.cutoff, n + 1, raise_coeff)
    left, _ = _clip(left_log, left_phase)
    return left @ (diag * right)


# Cutoff certification
# ====================

def _column_tail(gauge: GaugeSolution, params: ModelParams, n: int, space: FockSpace) -> float:
    tail = 0.0
    for inverse in (True, False):
        column = transformation_column(gauge, params, 0.0, n, space, inverse)
        norm = np.linalg.norm(column)
        upper = np.linalg.norm(column[space.cutoff // 2 :])
        tail = max(tail, float(upper / norm) if norm > 0 else math.inf)
    return tail


def estimated_cutoff(gauge: GaugeSolution, n_max: int, tol: float) -> Optional[int]:
    """Cutoff at which a tail decaying like |tan(eta/2)|^{k/2} beyond level n_max drops below tol.

    Returns None when the columns do not decay at all.
    """
    ratio = abs(gauge.tau)
    if ratio >= 1.0:
        return None
    if ratio == 0.0:
        return 2 * (n_max + 2)
    # the upper half starts at cutoff/2, the decay is per pair of levels
    return 2 * n_max + int(math.ceil(4.0 * math.log(tol) / math.log(ratio)))


def _cutoff_hint(gauge: GaugeSolution, n_max: int, tol: float) -> str:
    estimate = estimated_cutoff(gauge, n_max, tol)
    if estimate is None:
        return f"columns do not decay (|tan(eta/2)|={abs(gauge.tau):.4g})"
    return f"columns decay like {abs(gauge.tau):.4g}^(k/2), roughly {estimate} levels needed"


def certify_space(
    gauge: GaugeSolution,
    params: ModelParams,
    n_max: int,
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
    tol: Optional[float] = None,
    max_cutoff: Optional[int] = None,
    min_cutoff: int = 0,
) -> Tuple[FockSpace, CutoffCertificate]:
    """Working space on which R^{+-1}|n> for n <= n_max carry less than ``tol`` of their norm in the upper half.

    Under the ``fixed`` policy ``space`` itself is returned. On the normalizable
    branch a fixed space whose tail misses ``tol`` is rejected; on the other
    branch no cutoff converges and the space is returned with its measured tail
    for the branch-agnostic checks.
    """
    policy = settings.cutoff_policy if policy is None else policy
    tol = settings.tail_tolerance if tol is None else tol
    max_cutoff = settings.max_cutoff if max_cutoff is None else max_cutoff
    levels = [n for n in (n_max, n_max - 1) if n >= 0]

    if policy == "fixed":
        if n_max >= space.cutoff:
            raise IndexOutOfRange(f"level {n_max} outside cutoff {space.cutoff}")
        tail = max(_column_tail(gauge, params, n, space) for n in levels)
        if tail >= tol and gauge.normalizable:
            raise CutoffNotConverged(
                f"fixed cutoff {space.cutoff} leaves tail {tail:.3g} >= {tol:g} for n<={n_max}; "
                f"{_cutoff_hint(gauge, n_max, tol)} (the auto policy doubles the cutoff until it converges)"
            )
        if tail >= tol:
            logger.warning(f"Fixed cutoff {space.cutoff} is not certified for n<={n_max}: tail {tail:.3g}")
        certificate = CutoffCertificate(cutoff=space.cutoff, n_max=n_max, tail=tail, converged=tail < tol)
        return space, certificate

    if not gauge.normalizable:
        raise CutoffNotConverged(
            f"branch {gauge.branch:+d} has cos(eta)={gauge.cos_eta:.6g} <= 0: "
            "R^-1|n> is not square-summable and no cutoff converges"
        )

    cutoff = max(space.cutoff, 2 * (n_max + 2), min_cutoff)
    doublings = 0
    while True:
        working = space.with_cutoff(cutoff)
        tail = max(_column_tail(gauge, params, n, working) for n in levels)
        logger.debug(f"Cutoff {cutoff}: upper-half tail {tail:.3g} for n<={n_max}")
        if tail < tol:
            logger.info(f"Certified cutoff {cutoff} for n<={n_max} (tail {tail:.3g})")
            return working, CutoffCertificate(
                cutoff=cutoff, n_max=n_max, tail=tail, converged=True, doublings=doublings
            )
        if cutoff * 2 > max_cutoff:
            raise CutoffNotConverged(
                f"tail {tail:.3g} >= {tol:g} for n<={n_max} at the largest allowed cutoff {cutoff}; "
                f"{_cutoff_hint(gauge, n_max, tol)} (raise PTGAUGE_MAX_CUTOFF)"
            )
        cutoff *= 2
        doublings += 1


# New-gauge Hamiltonian
# =====================

def derivative_term_closed(
    gauge: GaugeSolution,
    params: ModelParams,
    t: float,
    space: FockSpace,
    inject_fault: bool = False,
) -> OperatorMatrix:
    """i R dR^-1/dt = 2 omega sin^2(eta/2) Sz - (omega/2) sin(eta) (S+ e^{i phi} - S- e^{-i phi})."""
    sz, splus, sminus = su11_generators(space)
    phase = np.exp(1j * params.phase(t))
    omega = params.omega
    l_coefficient = -(omega / 2.0) * gauge.sin_eta
    if inject_fault:
        l_coefficient = -l_coefficient
    entries = 2.0 * omega * math.sin(gauge.eta / 2.0) ** 2 * sz.entries + l_coefficient * (
        splus.entries * phase - sminus.entries * np.conj(phase)
    )
    return OperatorMatrix(space=space, entries=entries)


def inverse_time_derivative(
    gauge: GaugeSolution,
    params: ModelParams,
    t: float,
    space: FockSpace,
    method: DerivativeMethod = "analytic",
) -> OperatorMatrix:
    """dR^-1/dt, analytically from the disentangled form or by Richardson central differences."""
    if method == "finite-difference":
        h = params.period * settings.fd_step_fraction

        def r_inverse(time: float) -> np.ndarray:
            return build_R(gauge, params, time, space)[1].entries

        return OperatorMatrix(space=space, entries=richardson_central_difference(r_inverse, t, h))

    _, r_inverse = build_R(gauge, params, t, space)
    _, splus, sminus = su11_generators(space)
    phase = np.exp(1j * params.phase(t))
    rate = 1j * params.omega * gauge.tau
    entries = rate * phase * (splus.entries @ r_inverse.entries) - rate * np.conj(phase) * (
        r_inverse.entries @ sminus.entries
    )
    return OperatorMatrix(space=space, entries=entries)


def derivative_term_numeric(
    gauge: GaugeSolution,
    params: ModelParams,
    t: float,
    space: FockSpace,
    method: DerivativeMethod = "analytic",
) -> OperatorMatrix:
    r, _ = build_R(gauge, params, t, space)
    return 1j * (r @ inverse_time_derivative(gauge, params, t, space, method))


def _working_space(
    gauge: GaugeSolution,
    params: ModelParams,
    space: FockSpace,
    policy: Optional[CutoffPolicy],
) -> FockSpace:
    working, _ = certify_space(gauge, params, space.interior - 1, space, policy=policy)
    return working


def similarity_scale(r: OperatorMatrix, middle: OperatorMatrix, r_inverse: OperatorMatrix) -> np.ndarray:
    """|R| |X| |R^-1|, the size of the terms summed into each entry of R X R^-1."""
    return np.abs(r.entries) @ np.abs(middle.entries) @ np.abs(r_inverse.entries)


def scaled_residual(difference: np.ndarray, scale: np.ndarray, size: int) -> float:
    """Max of |difference| / max(1, scale) on the leading size x size block.

    Absolute where the summed terms are O(1); relative to them on high levels,
    where R and R^-1 grow exponentially.
    """
    block = np.abs(difference[:size, :size]) / np.maximum(1.0, scale[:size, :size])
    return float(block.max()) if block.size else 0.0


def _transform_on(
    params: ModelParams,
    gauge: GaugeSolution,
    t: float,
    working: FockSpace,
    derivative: DerivativeMethod,
    inject_fault: bool,
) -> Tuple[OperatorMatrix, np.ndarray]:
    r, r_inverse = build_R(gauge, params, t, working)
    hamiltonian = build_hamiltonian(params, t, working)
    if derivative == "closed":
        term = derivative_term_closed(gauge, params, t, working, inject_fault=inject_fault)
    else:
        term = derivative_term_numeric(gauge, params, t, working, method=derivative)
    transformed = r @ hamiltonian @ r_inverse - term
    return transformed, similarity_scale(r, hamiltonian, r_inverse)


def gauge_transform(
    params: ModelParams,
    gauge: GaugeSolution,
    t: float,
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
    derivative: DerivativeMethod = "closed",
    inject_fault: bool = False,
) -> OperatorMatrix:
    """H' = R H R^-1 - i R dR^-1/dt, computed on a certified working space and cropped to ``space``."""
    working = _working_space(gauge, params, space, policy)
    transformed, _ = _transform_on(params, gauge, t, working, derivative, inject_fault)
    return transformed.crop(space)


def kernel_residual(
    params: ModelParams,
    gauge: GaugeSolution,
    t: float,
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
    inject_fault: bool = False,
) -> float:
    """Scaled deviation of H' from diag(Gamma (n + 1/2)) on the interior block."""
    working = _working_space(gauge, params, space, policy)
    transformed, scale = _transform_on(params, gauge, t, working, "closed", inject_fault)
    expected = np.diag(gauge.Gamma * (np.arange(working.cutoff) + 0.5))
    return scaled_residual(transformed.entries - expected, scale, space.interior)


# Similarity relations
# ====================

def bch_closed_forms(
    gauge: GaugeSolution, params: ModelParams, t: float, space: FockSpace
) -> Tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """R S+ R^-1, R S- R^-1 and R Sz R^-1 assembled from Sz, S+-, eta and phi."""
    sz, splus, sminus = su11_generators(space)
    phase = np.exp(1j * params.phase(t))
    cos_half_sq = math.cos(gauge.eta / 2.0) ** 2
    sin_half_sq = math.sin(gauge.eta / 2.0) ** 2
    sin_eta, cos_eta = gauge.sin_eta, gauge.cos_eta
    rhs_splus = (
        cos_half_sq * splus.entries
        + sin_half_sq * np.conj(phase) ** 2 * sminus.entries
        - sin_eta * np.conj(phase) * sz.entries
    )
    rhs_sminus = (
        cos_half_sq * sminus.entries
        + sin_half_sq * phase**2 * splus.entries
        + sin_eta * phase * sz.entries
    )
    rhs_sz = cos_eta * sz.entries + 0.5 * sin_eta * (
        splus.entries * phase - sminus.entries * np.conj(phase)
    )
    return (
        OperatorMatrix(space=space, entries=rhs_splus),
        OperatorMatrix(space=space, entries=rhs_sminus),
        OperatorMatrix(space=space, entries=rhs_sz),
    )


def verify_bch(
    params: ModelParams,
    gauge: GaugeSolution,
    t: float,
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
    derivative: DerivativeMethod = "analytic",
    inject_fault: bool = False,
) -> BCHResiduals:
    working = _working_space(gauge, params, space, policy)
    r, r_inverse = build_R(gauge, params, t, working)
    sz, splus, sminus = su11_generators(working)
    rhs_splus, rhs_sminus, rhs_sz = bch_closed_forms(gauge, params, t, working)
    numeric_term = derivative_term_numeric(gauge, params, t, working, method=derivative)
    closed_term = derivative_term_closed(gauge, params, t, working, inject_fault=inject_fault)
    size = space.interior
    abs_r, abs_r_inverse = np.abs(r.entries), np.abs(r_inverse.entries)
    derivative_scale = (
        params.omega
        * abs(gauge.tau)
        * (abs_r @ (np.abs(splus.entries) @ abs_r_inverse + abs_r_inverse @ np.abs(sminus.entries)))
    )
    residuals = BCHResiduals(
        splus=scaled_residual(
            (r @ splus @ r_inverse - rhs_splus).entries, similarity_scale(r, splus, r_inverse), size
        ),
        sminus=scaled_residual(
            (r @ sminus @ r_inverse - rhs_sminus).entries, similarity_scale(r, sminus, r_inverse), size
        ),
        sz=scaled_residual((r @ sz @ r_inverse - rhs_sz).entries, similarity_scale(r, sz, r_inverse), size),
        derivative=scaled_residual((numeric_term - closed_term).entries, derivative_scale, size),
    )
    logger.info(f"BCH residuals at t={t:.6g} on {size} levels (working cutoff {working.cutoff}): {residuals}")
    return residuals


# PT symmetry
# ===========

def pt_check_operator(builder: Callable[[float], OperatorMatrix], t: float) -> float:
    """max |Pi conj(A(-t)) Pi - A(t)| for an operator-valued function of time."""
    current = builder(t)
    reflected = builder(-t).conjugate()
    parity = parity_operator(current.space)
    return float(np.max(np.abs((parity @ reflected @ parity - current).entries)))


def pt_check(params: ModelParams, t: float, space: FockSpace) -> float:
    return pt_check_operator(lambda time: build_hamiltonian(params, time, space), t)


# Spectra
# =======

def _sorted_by_magnitude(values: np.ndarray) -> np.ndarray:
    return values[np.argsort(np.abs(values.real), kind="stable")]


def floquet_spectrum(
    params: ModelParams,
    gauge: GaugeSolution,
    n_max: int,
    t: float = 0.0,
    space: Optional[FockSpace] = None,
) -> List[float]:
    """Quasi-energies from dense eigenvalues of H(t) + omega Sz, shifted by -omega (n + 1/2)/2.

    H(t) + omega Sz is unitarily equivalent to its t = 0 value, so the result is
    t-independent and equals (n + 1/2) Gamma on the normalizable branch.
    """
    space = FockSpace(cutoff=settings.default_cutoff, boundary_margin=2) if space is None else space
    working, _ = certify_space(gauge, params, n_max - 1, space, min_cutoff=4 * n_max)
    sz, _, _ = su11_generators(working)
    generator = build_hamiltonian(params, t, working) + params.omega * sz
    values = _sorted_by_magnitude(eigvals(generator.entries))[:n_max]
    imaginary = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if imaginary > settings.assertion_tolerance:
        logger.warning(f"Floquet eigenvalues carry imaginary parts up to {imaginary:.3g}")
    return [float(values[n].real - params.omega * (n + 0.5) / 2.0) for n in range(n_max)]


def instantaneous_spectrum(params: ModelParams, t: float, n_max: int, space: FockSpace) -> List[float]:
    """Lowest n_max dense eigenvalues of H(t) (real parts), ordered by magnitude."""
    values = _sorted_by_magnitude(eigvals(build_hamiltonian(params, t, space).entries))
    return [float(value.real) for value in values[:n_max]]
