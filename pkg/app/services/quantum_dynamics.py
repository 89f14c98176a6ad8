"""
Biorthogonal dynamics under the non-Hermitian H(t): gauge-solution states,
the metric operator chi = R^2, adaptive time evolution, the non-adiabatic
Berry phase by three routes, and position-space wavefunctions.
"""

import logging
import math
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import expm

from app.core.config import settings
from app.core.exceptions import CutoffNotConverged, DimensionMismatch, IndexOutOfRange, NonNormalizable
from app.models.dynamics import BiorthogonalState, EvolutionPhase, EvolutionResult, PhaseReport, StepStats
from app.models.fock import FockSpace, OperatorMatrix
from app.models.gauge import GaugeSolution, ModelParams
from app.services.fock_algebra import basis_vector
from app.services.gauge_engine import (
    CutoffPolicy,
    apply_disentangled,
    build_metric,
    build_R,
    build_hamiltonian,
    certify_space,
    derivative_term_closed,
    transformation_column,
)
from app.services.numerics import adaptive_quad, adaptive_quad_complex, integrate_complex_ode

logger = logging.getLogger(__name__)


# States
# ======

def kernel_eigenstate(n: int, space: FockSpace) -> np.ndarray:
    """Unit vector e_n, an eigenvector of 2 Sz with eigenvalue n + 1/2."""
    if not 0 <= n < space.interior:
        raise IndexOutOfRange(
            f"level {n} outside the certified range [0, {space.interior}) of cutoff {space.cutoff}"
        )
    return basis_vector(n, space)


def _energy(gauge: GaugeSolution, n: int) -> float:
    return gauge.Gamma * (n + 0.5)


def _state_on(
    params: ModelParams, gauge: GaugeSolution, n: int, t: float, working: FockSpace
) -> BiorthogonalState:
    phase = np.exp(-1j * _energy(gauge, n) * t)
    ket = phase * transformation_column(gauge, params, t, n, working, inverse=True)
    bra = phase * transformation_column(gauge, params, t, n, working, inverse=False)
    return BiorthogonalState(ket=ket, bra=bra, label=n, time=t, space=working)


def gauge_solution_state(
    params: ModelParams,
    gauge: GaugeSolution,
    n: int,
    t: float,
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
) -> BiorthogonalState:
    """ket = e^{-i E_n t} R^-1(t) e_n and bra = e^{-i E_n t} R(t) e_n on a certified working space."""
    working, _ = certify_space(gauge, params, n, space, policy=policy)
    return _state_on(params, gauge, n, t, working)


def gauge_solution_basis(
    params: ModelParams,
    gauge: GaugeSolution,
    n_max: int,
    t: float,
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
) -> List[BiorthogonalState]:
    """States 0..n_max sharing one working space."""
    working, _ = certify_space(gauge, params, n_max, space, policy=policy)
    return [_state_on(params, gauge, n, t, working) for n in range(n_max + 1)]


def gram_matrix(states: Sequence[BiorthogonalState]) -> np.ndarray:
    """G[n, m] = <bra_n|ket_m>."""
    bras = np.array([state.bra for state in states])
    kets = np.array([state.ket for state in states])
    return bras.conj() @ kets.T


def metric_operator(gauge: GaugeSolution, params: ModelParams, t: float, space: FockSpace) -> OperatorMatrix:
    """chi(t) = R(t)^2 with exact entries on every kept row and column."""
    return build_metric(gauge, params, t, space)


def apply_metric(
    gauge: GaugeSolution, params: ModelParams, t: float, vector: np.ndarray, space: FockSpace
) -> np.ndarray:
    """chi psi evaluated as R (R psi).

    The entries of chi grow like tan(eta)^{k/2}, so chi psi summed directly over a
    truncated basis diverges once |eta| > pi/3; both factors of R converge for cos(eta) > 0.
    """
    vector = np.asarray(vector, dtype=np.complex128)
    if vector.shape != (space.cutoff,):
        raise DimensionMismatch(f"vector of length {vector.shape[0]} on cutoff {space.cutoff}")
    r, _ = build_R(gauge, params, t, space)
    return r.entries @ (r.entries @ vector)


def metric_residual(state: BiorthogonalState, gauge: GaugeSolution, params: ModelParams) -> float:
    """max |chi ket - bra| / max(1, |R| |R| |ket|) over the lower half of the working basis."""
    if not gauge.normalizable:
        raise NonNormalizable(f"cos(eta)={gauge.cos_eta:.6g} <= 0: the metric is unbounded")
    r, _ = build_R(gauge, params, state.time, state.space)
    magnitude = np.abs(r.entries)
    scale = magnitude @ (magnitude @ np.abs(state.ket))
    difference = r.entries @ (r.entries @ state.ket) - state.bra
    rows = state.space.cutoff // 2
    return float(np.max(np.abs(difference[:rows]) / np.maximum(1.0, scale[:rows])))


def metric_gram(states: Sequence[BiorthogonalState], gauge: GaugeSolution, params: ModelParams) -> np.ndarray:
    """<psi_n|chi|psi_m> = <R psi_n|R psi_m> with psi the kets, R being Hermitian."""
    first = states[0]
    if any(state.space != first.space or state.time != first.time for state in states):
        raise DimensionMismatch("metric Gram matrix needs states on one space at one time")
    r, _ = build_R(gauge, params, first.time, first.space)
    mapped = np.array([r.entries @ state.ket for state in states])
    return mapped.conj() @ mapped.T


def biorthogonal_coefficients(psi: np.ndarray, basis: Sequence[BiorthogonalState]) -> np.ndarray:
    """c_n = <bra_n|psi>."""
    return np.array([np.vdot(state.bra, psi) for state in basis])


def coherent_state(alpha: complex, space: FockSpace) -> np.ndarray:
    coefficients = np.empty(space.cutoff, dtype=np.complex128)
    coefficients[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, space.cutoff):
        coefficients[n] = coefficients[n - 1] * alpha / math.sqrt(n)
    return coefficients


def expectation(operator: OperatorMatrix, psi: np.ndarray) -> complex:
    return complex(np.vdot(psi, operator @ psi) / np.vdot(psi, psi))


# Evolution
# =========
#
# H(t) lies in the su(1,1) algebra, so its propagator factors as
#
#     U(t, t0) = exp(alpha S+) exp(beta Sz) exp(gamma S-),   alpha = beta = gamma = 0 at t0.
#
# The coordinates obey scalar equations untouched by the Fock truncation, and U is
# applied through the exact disentangled entries. Integrating the truncated matrix
# H(t) instead excites boundary modes whose eigenvalues have large imaginary parts.

def _drive(params: ModelParams, t: float) -> Tuple[complex, complex, float]:
    """Coefficients (h+, h-, hz) of H(t) = hz Sz + h+ S+ + h- S-."""
    phase = np.exp(1j * params.phase(t))
    return params.G * phase, -params.G * np.conj(phase), params.Omega


def propagator_rhs(params: ModelParams):
    """Right-hand side of the coordinate equations obtained from i dU/dt = H(t) U."""

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        alpha, beta, _ = y
        h_plus, h_minus, h_z = _drive(params, t)
        return np.array(
            [
                -1j * (h_plus + alpha * h_z + alpha**2 * h_minus),
                -1j * (h_z + 2.0 * alpha * h_minus),
                -1j * h_minus * np.exp(beta),
            ]
        )

    return rhs


def fundamental_hamiltonian(params: ModelParams, t: float) -> np.ndarray:
    """H(t) in the two-dimensional representation Sz -> sigma_z/2, S+- -> i sigma_+-; it is Hermitian there."""
    h_plus, h_minus, h_z = _drive(params, t)
    return np.array([[0.5 * h_z, 1j * h_plus], [1j * h_minus, -0.5 * h_z]])


def _midpoint_coordinates(
    params: ModelParams, t0: float, checkpoints: Sequence[float], steps: int
) -> Tuple[List[np.ndarray], StepStats]:
    """Exponential mid-point steps on the 2x2 propagator, read out as (alpha, beta, gamma) at each checkpoint."""
    span = checkpoints[-1] - t0
    propagator = np.eye(2, dtype=np.complex128)
    angle = 0.0
    previous = t0
    coordinates = [np.zeros(3, dtype=np.complex128)]
    taken = 0
    for checkpoint in checkpoints:
        count = max(1, int(round(steps * (checkpoint - previous) / span)))
        h = (checkpoint - previous) / count
        for k in range(count):
            midpoint = previous + (k + 0.5) * h
            propagator = expm(-1j * h * fundamental_hamiltonian(params, midpoint)) @ propagator
            # follow arg(U[1,1]) continuously; beta carries e^{beta/4} on the ground level
            step = np.angle(propagator[1, 1]) - angle
            angle += step - 2.0 * math.pi * round(step / (2.0 * math.pi))
        taken += count
        previous = checkpoint
        corner = propagator[1, 1]
        coordinates.append(
            np.array(
                [
                    -1j * propagator[0, 1] / corner,
                    -2.0 * (math.log(abs(corner)) + 1j * angle),
                    -1j * propagator[1, 0] / corner,
                ]
            )
        )
    return coordinates, StepStats(accepted=taken, rejected=0, evaluations=taken)


def _propagate(coordinates: np.ndarray, psi0: np.ndarray, space: FockSpace) -> Tuple[np.ndarray, float]:
    """U psi0 and its change when psi0 loses its upper half, relative to max(1, |U psi0|) on the lower half."""
    alpha, beta, gamma = coordinates
    state = apply_disentangled(alpha, beta, gamma, psi0, space)
    clipped = psi0.copy()
    clipped[space.cutoff // 2 :] = 0.0
    rows = space.cutoff // 2
    reference = apply_disentangled(alpha, beta, gamma, clipped, space)
    scale = max(1.0, float(np.max(np.abs(state[:rows]))))
    return state, float(np.max(np.abs(state[:rows] - reference[:rows]))) / scale


def evolve(
    params: ModelParams,
    psi0: np.ndarray,
    t0: float,
    t1: float,
    space: FockSpace,
    tol: Optional[float] = None,
    method: Literal["rk45", "midpoint"] = "rk45",
    t_eval: Optional[Sequence[float]] = None,
    steps: int = 2000,
) -> EvolutionResult:
    """Solve i dpsi/dt = H(t) psi on [t0, t1] without renormalizing.

    ``rk45`` integrates the propagator coordinates adaptively; ``tol`` is the
    relative tolerance of the step controller and the absolute one is a hundredth
    of it. ``midpoint`` takes ``steps`` fixed exponential mid-point steps on the
    two-dimensional propagator. Without ``t_eval`` rk45 records every accepted
    step and midpoint only t1.
    """
    if t1 <= t0:
        raise ValueError(f"t1={t1} must exceed t0={t0}")
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (space.cutoff,):
        raise DimensionMismatch(f"initial state of length {psi0.shape[0]} on cutoff {space.cutoff}")

    if method == "midpoint":
        samples = [] if t_eval is None else sorted(float(t) for t in t_eval if t0 < t < t1)
        times = [t0] + samples + [t1]
        coordinates, stats = _midpoint_coordinates(params, t0, times[1:], steps)
    else:
        rtol = settings.ode_rtol if tol is None else tol
        atol = settings.ode_atol if tol is None else tol * 1e-2
        times, coordinates, stats = integrate_complex_ode(
            propagator_rhs(params), t0, t1, np.zeros(3, dtype=np.complex128), rtol=rtol, atol=atol, t_eval=t_eval
        )

    states, sensitivity = [], 0.0
    for point in coordinates:
        state, change = _propagate(point, psi0, space)
        states.append(state)
        sensitivity = max(sensitivity, change)
    if sensitivity > settings.evolution_tolerance:
        logger.warning(
            f"Evolved state depends on the upper half of cutoff {space.cutoff} "
            f"(relative change {sensitivity:.3g}); the truncation does not represent it"
        )
    logger.info(
        f"Evolved cutoff {space.cutoff} over [{t0:.6g}, {t1:.6g}] by {method}: "
        f"{stats.accepted} accepted, {stats.rejected} rejected steps"
    )
    return EvolutionResult(
        times=times,
        states=states,
        step_controller_stats=stats,
        method=method,
        truncation_sensitivity=sensitivity,
    )


# Berry phase
# ===========

def quadrature_space(n: int) -> FockSpace:
    """Smallest space on which the diagonal of the closed-form derivative term is exact for level n."""
    return FockSpace(cutoff=max(8, 2 * (n + 3)), boundary_margin=2)


def berry_phase_closed(gauge: GaugeSolution, params: ModelParams, n: int) -> float:
    """gamma_n = pi (n + 1/2)(1 - cos eta)."""
    return math.pi * (n + 0.5) * (1.0 - gauge.cos_eta)


def berry_integrand(
    gauge: GaugeSolution, params: ModelParams, n: int, t: float, space: FockSpace
) -> complex:
    """<n| i R dR^-1/dt |n> from the closed-form operator."""
    term = derivative_term_closed(gauge, params, t, space)
    return complex(term.entries[n, n])


def berry_phase_quadrature_with_residual(
    gauge: GaugeSolution,
    params: ModelParams,
    n: int,
    space: FockSpace,
    tol: Optional[float] = None,
) -> Tuple[float, float]:
    """Real part of the integral over one period and the magnitude of its imaginary part."""
    if not 0 <= n < space.interior:
        raise IndexOutOfRange(f"level {n} outside the certified range of cutoff {space.cutoff}")
    value, _ = adaptive_quad_complex(
        lambda t: berry_integrand(gauge, params, n, t, space), 0.0, params.period, tol
    )
    return value.real, abs(value.imag)


def berry_phase_quadrature(
    gauge: GaugeSolution,
    params: ModelParams,
    n: int,
    space: FockSpace,
    tol: Optional[float] = None,
) -> float:
    return berry_phase_quadrature_with_residual(gauge, params, n, space, tol)[0]


def berry_phase_from_evolution(
    params: ModelParams,
    gauge: GaugeSolution,
    n: int,
    space: FockSpace,
    tol: Optional[float] = None,
    policy: Optional[CutoffPolicy] = None,
) -> EvolutionPhase:
    """Total minus dynamical phase of the evolved gauge-solution ket over one period."""
    working, _ = certify_space(gauge, params, n, space, policy=policy)
    period = params.period
    ket0 = transformation_column(gauge, params, 0.0, n, working, inverse=True)
    bra0 = transformation_column(gauge, params, 0.0, n, working, inverse=False)
    result = evolve(params, ket0, 0.0, period, working, tol=tol, t_eval=[period])
    if result.truncation_sensitivity > settings.evolution_tolerance:
        raise CutoffNotConverged(
            f"evolved ket of level {n} changes by {result.truncation_sensitivity:.3g} when the upper half "
            f"of cutoff {working.cutoff} is dropped; the propagator series does not settle on this space"
        )
    total = float(np.angle(np.vdot(bra0, result.final_state)))

    def energy_density(t: float) -> float:
        ket = transformation_column(gauge, params, t, n, working, inverse=True)
        bra = transformation_column(gauge, params, t, n, working, inverse=False)
        return float(np.vdot(bra, build_hamiltonian(params, t, working) @ ket).real)

    integral, _ = adaptive_quad(energy_density, 0.0, period)
    dynamical = -integral
    raw = total - dynamical
    closed = berry_phase_closed(gauge, params, n)
    shift = int(round((closed - raw) / (2.0 * math.pi)))
    gamma = raw + 2.0 * math.pi * shift
    logger.info(
        f"Evolution route n={n}: total={total:.12g}, dynamical={dynamical:.12g}, "
        f"gamma={gamma:.12g} (2pi shift {shift})"
    )
    return EvolutionPhase(
        total=total, dynamical=dynamical, gamma=gamma, raw=raw, shift=shift, cutoff=working.cutoff
    )


def berry_phase_report(
    params: ModelParams,
    gauge: GaugeSolution,
    n: int,
    space: FockSpace,
    tol: Optional[float] = None,
    policy: Optional[CutoffPolicy] = None,
    quad_tol: Optional[float] = None,
) -> PhaseReport:
    """All three routes for level n; ``tol`` steers the integrator and ``quad_tol`` the quadrature."""
    quad_tol = settings.quad_tolerance if quad_tol is None else quad_tol
    quadrature, imaginary = berry_phase_quadrature_with_residual(gauge, params, n, space, tol=quad_tol)
    evolution = berry_phase_from_evolution(params, gauge, n, space, tol=tol, policy=policy)
    return PhaseReport(
        gamma_closed=berry_phase_closed(gauge, params, n),
        gamma_quadrature=quadrature,
        gamma_evolution=evolution.gamma,
        n=n,
        branch=gauge.branch,
        quadrature_imag_residual=imaginary,
        evolution_raw=evolution.raw,
        evolution_shift=evolution.shift,
    )


# Position representation
# =======================

def kernel_wavefunctions(n_max: int, Gamma: float, grid: Sequence[float]) -> np.ndarray:
    """Rows psi'_0 .. psi'_{n_max-1} of the kernel oscillator on ``grid`` by the Hermite-function recurrence."""
    if Gamma <= 0.0:
        raise NonNormalizable(f"Gamma={Gamma} <= 0: the kernel is an inverted oscillator")
    x = np.asarray(grid, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("grid must be finite")
    y = math.sqrt(Gamma) * x
    rows = np.zeros((max(n_max, 1), x.size))
    rows[0] = math.pi ** -0.25 * np.exp(-(y**2) / 2.0)
    if n_max > 1:
        rows[1] = math.sqrt(2.0) * y * rows[0]
    for k in range(1, n_max - 1):
        rows[k + 1] = math.sqrt(2.0 / (k + 1)) * y * rows[k] - math.sqrt(k / (k + 1)) * rows[k - 1]
    return Gamma**0.25 * rows[:n_max]


def kernel_wavefunction(n: int, Gamma: float, grid: Sequence[float]) -> np.ndarray:
    return kernel_wavefunctions(n + 1, Gamma, grid)[n].astype(np.complex128)


def _fock_to_grid(coefficients: np.ndarray, Gamma: float, grid: Sequence[float]) -> np.ndarray:
    basis = kernel_wavefunctions(coefficients.shape[0], Gamma, grid)
    return coefficients @ basis


def original_gauge_wavefunction(
    params: ModelParams,
    gauge: GaugeSolution,
    n: int,
    t: float,
    grid: Sequence[float],
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
) -> np.ndarray:
    """sum_m (R^-1(t) e_n)_m psi'_m(X) e^{-i E_n t}."""
    if gauge.Gamma <= 0.0:
        raise NonNormalizable(f"Gamma={gauge.Gamma} <= 0: no position representation")
    state = gauge_solution_state(params, gauge, n, t, space, policy=policy)
    return _fock_to_grid(state.ket, gauge.Gamma, grid)


def original_gauge_bra_wavefunction(
    params: ModelParams,
    gauge: GaugeSolution,
    n: int,
    t: float,
    grid: Sequence[float],
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
) -> np.ndarray:
    """Position representation of the metric-transformed partner chi psi_n = e^{-i E_n t} R(t) e_n."""
    if gauge.Gamma <= 0.0:
        raise NonNormalizable(f"Gamma={gauge.Gamma} <= 0: no position representation")
    state = gauge_solution_state(params, gauge, n, t, space, policy=policy)
    return _fock_to_grid(state.bra, gauge.Gamma, grid)


def position_overlap(
    params: ModelParams,
    gauge: GaugeSolution,
    n: int,
    t: float,
    grid: Sequence[float],
    space: FockSpace,
    policy: Optional[CutoffPolicy] = None,
) -> complex:
    """Trapezoid integral of conj(chi psi_n) psi_n over the grid."""
    ket = original_gauge_wavefunction(params, gauge, n, t, grid, space, policy)
    bra = original_gauge_bra_wavefunction(params, gauge, n, t, grid, space, policy)
    return complex(trapezoid(bra.conj() * ket, np.asarray(grid, dtype=np.float64)))
