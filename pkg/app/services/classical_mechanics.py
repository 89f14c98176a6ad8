"""
Classical counterpart of the driven SU(1,1) model on complexified phase space:
the complex Hamiltonian, the PT-symmetric time-dependent canonical map onto the
static kernel (Gamma/2)(X^2 + P^2), its generating function, action-angle
variables, the Hannay angle and the correspondence with the Berry phase.

The quantum R(t) with angle eta induces the canonical map below with angle
-eta, so every function here takes the quantum GaugeSolution and uses
eta_cl = -gauge.eta internally.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import CoefficientMismatch
from app.models.classical import (
    ActionAngle,
    ClassicalTrajectory,
    ComplexPhasePoint,
    HannayResult,
    KernelForm,
)
from app.models.fock import FockSpace
from app.models.gauge import GaugeSolution, ModelParams
from app.services.gauge_engine import solve_auxiliary
from app.services.numerics import integrate_complex_ode, tensor_gauss_legendre
from app.services.quantum_dynamics import berry_phase_quadrature, quadrature_space

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def classical_eta(gauge: GaugeSolution) -> float:
    return -gauge.eta


def _half_angles(gauge: GaugeSolution) -> Tuple[float, float]:
    eta = classical_eta(gauge)
    return math.cos(eta / 2.0), math.sin(eta / 2.0)


# Hamiltonian
# ===========

def classical_hamiltonian_xp(x, p, t, params: ModelParams):
    """Vectorized H(x, p, t); x and p may be complex arrays."""
    phi = params.phase(t)
    sin_phi, cos_phi = np.sin(phi), np.cos(phi)
    return (
        (params.Omega / 4.0 + 0.5j * params.G * sin_phi) * x**2
        + (params.Omega / 4.0 - 0.5j * params.G * sin_phi) * p**2
        - 1j * params.G * cos_phi * x * p
    )


def classical_hamiltonian(z: ComplexPhasePoint, params: ModelParams) -> complex:
    return complex(classical_hamiltonian_xp(z.x, z.p, z.t, params))


def hamilton_vector_field(x, p, t, params: ModelParams):
    """(dH/dp, -dH/dx)."""
    phi = params.phase(t)
    sin_phi, cos_phi = math.sin(phi), math.cos(phi)
    dh_dx = 2.0 * (params.Omega / 4.0 + 0.5j * params.G * sin_phi) * x - 1j * params.G * cos_phi * p
    dh_dp = 2.0 * (params.Omega / 4.0 - 0.5j * params.G * sin_phi) * p - 1j * params.G * cos_phi * x
    return dh_dp, -dh_dx


# Canonical map
# =============

def map_matrix(t, gauge: GaugeSolution) -> np.ndarray:
    """2x2 coefficient matrix M(t) with (x, p) = M (X, P)."""
    c, s = _half_angles(gauge)
    phi = gauge.omega * t
    alpha, beta = math.sin(phi), math.cos(phi)
    return np.array(
        [
            [c - 1j * alpha * s, 1j * beta * s],
            [1j * beta * s, c + 1j * alpha * s],
        ]
    )


def _map_arrays(X, P, phi, gauge: GaugeSolution):
    c, s = _half_angles(gauge)
    alpha, beta = np.sin(phi), np.cos(phi)
    x = (c - 1j * alpha * s) * X + 1j * beta * s * P
    p = 1j * beta * s * X + (c + 1j * alpha * s) * P
    return x, p


def canonical_map(X, P, t: float, gauge: GaugeSolution):
    """(x, p) from kernel variables (X, P) at time t."""
    return _map_arrays(X, P, gauge.omega * t, gauge)


def inverse_canonical_map(x, p, t: float, gauge: GaugeSolution):
    """(X, P) from (x, p); the map has unit determinant."""
    c, s = _half_angles(gauge)
    phi = gauge.omega * t
    alpha, beta = np.sin(phi), np.cos(phi)
    X = (c + 1j * alpha * s) * x - 1j * beta * s * p
    P = -1j * beta * s * x + (c - 1j * alpha * s) * p
    return X, P


def map_determinant(t: float, gauge: GaugeSolution) -> complex:
    return complex(np.linalg.det(map_matrix(t, gauge)))


def generating_function(X, P, t: float, gauge: GaugeSolution, params: ModelParams):
    eta = classical_eta(gauge)
    phi = params.phase(t)
    alpha, beta = np.sin(phi), np.cos(phi)
    half_sin_sq = math.sin(eta / 2.0) ** 2
    sin_eta = math.sin(eta)
    return (
        (-0.5j * beta * sin_eta - alpha * beta * half_sin_sq) * X**2 / 2.0
        + beta**2 * X * P * half_sin_sq
        + (-0.5j * beta * sin_eta + alpha * beta * half_sin_sq) * P**2 / 2.0
    )


def _generating_partials(X, P, t, gauge: GaugeSolution, params: ModelParams):
    """(dF/dX, dF/dP, dF/dt)."""
    eta = classical_eta(gauge)
    omega = params.omega
    phi = params.phase(t)
    alpha, beta = np.sin(phi), np.cos(phi)
    q = math.sin(eta / 2.0) ** 2
    sin_eta = math.sin(eta)
    f1 = -0.5j * beta * sin_eta - alpha * beta * q
    f2 = beta**2 * q
    f3 = -0.5j * beta * sin_eta + alpha * beta * q
    df1 = 0.5j * omega * alpha * sin_eta - omega * (beta**2 - alpha**2) * q
    df2 = -2.0 * omega * alpha * beta * q
    df3 = 0.5j * omega * alpha * sin_eta + omega * (beta**2 - alpha**2) * q
    return (
        f1 * X + f2 * P,
        f2 * X + f3 * P,
        df1 * X**2 / 2.0 + df2 * X * P + df3 * P**2 / 2.0,
    )


def _map_time_derivative(X, P, t, gauge: GaugeSolution):
    """(dx/dt, dp/dt) at fixed (X, P)."""
    _, s = _half_angles(gauge)
    omega = gauge.omega
    phi = omega * t
    alpha, beta = np.sin(phi), np.cos(phi)
    dx = -1j * omega * s * (beta * X + alpha * P)
    dp = -1j * omega * s * (alpha * X - beta * P)
    return dx, dp


def new_gauge_hamiltonian(X, P, t, gauge: GaugeSolution, params: ModelParams):
    """H' = H(x, p, t) - p dx/dt|_(X,P) - dF/dt, from L' = L + dF/dt."""
    x, p = canonical_map(X, P, t, gauge)
    dx_dt, _ = _map_time_derivative(X, P, t, gauge)
    _, _, df_dt = _generating_partials(X, P, t, gauge, params)
    return classical_hamiltonian_xp(x, p, t, params) - p * dx_dt - df_dt


def kernel_hamiltonian(X, P, gauge: GaugeSolution):
    return 0.5 * gauge.Gamma * (X**2 + P**2)


def verify_gauge_equivalence(
    params: ModelParams,
    gauge: GaugeSolution,
    samples: int,
    seed: int = 0,
) -> float:
    """max |P Xdot - H' - (p xdot - H) - dF/dt| over random (X, P, t) with Xdot, Pdot from the kernel."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    X = rng.normal(size=samples)
    P = rng.normal(size=samples)
    t = rng.uniform(0.0, params.period, size=samples)
    x_dot_kernel, p_dot_kernel = gauge.Gamma * P, -gauge.Gamma * X

    c, s = _half_angles(gauge)
    phi = params.phase(t)
    alpha, beta = np.sin(phi), np.cos(phi)
    x, p = canonical_map(X, P, t, gauge)
    dx_dt, _ = _map_time_derivative(X, P, t, gauge)
    x_dot = (c - 1j * alpha * s) * x_dot_kernel + 1j * beta * s * p_dot_kernel + dx_dt

    df_dX, df_dP, df_dt = _generating_partials(X, P, t, gauge, params)
    f_dot = df_dX * x_dot_kernel + df_dP * p_dot_kernel + df_dt

    residual = (
        P * x_dot_kernel
        - kernel_hamiltonian(X, P, gauge)
        - (p * x_dot - classical_hamiltonian_xp(x, p, t, params))
        - f_dot
    )
    worst = float(np.max(np.abs(residual)))
    logger.info(f"Lagrangian gauge-equivalence residual over {samples} samples: {worst:.3g}")
    return worst


def transformed_hamiltonian(
    params: ModelParams,
    gauge: GaugeSolution,
    times: Optional[Sequence[float]] = None,
    tol: float = 1e-12,
) -> KernelForm:
    """Extract the X^2, P^2, XP coefficients of H' at several t and confirm (Gamma/2, Gamma/2, 0)."""
    period = params.period
    times = [0.0, period / 7.0, period / 3.0] if times is None else list(times)
    expected = 0.5 * gauge.Gamma
    rows = []
    for t in times:
        a = complex(new_gauge_hamiltonian(1.0, 0.0, t, gauge, params))
        b = complex(new_gauge_hamiltonian(0.0, 1.0, t, gauge, params))
        cross = complex(new_gauge_hamiltonian(1.0, 1.0, t, gauge, params)) - a - b
        rows.append((a, b, cross))
    coefficients = np.array(rows)
    scale = max(1.0, abs(expected))
    deviation = 0.0
    for (a, b, cross), t in zip(rows, times):
        for name, value, target in (("X^2", a, expected), ("P^2", b, expected), ("XP", cross, 0.0)):
            miss = abs(value - target)
            deviation = max(deviation, miss)
            if miss > tol * scale:
                raise CoefficientMismatch(
                    f"{name} coefficient {value:.15g} at t={t:.6g} differs from {target:.15g}",
                    coefficient=name,
                    value=value,
                    expected=target,
                )
    mean = coefficients.mean(axis=0)
    return KernelForm(
        x2=complex(mean[0]),
        p2=complex(mean[1]),
        xp=complex(mean[2]),
        Gamma=float((mean[0] + mean[1]).real),
        times=[float(t) for t in times],
        max_deviation=deviation,
    )


# Action-angle variables and the Hannay angle
# ===========================================

def action_angle_map(aa: ActionAngle) -> Tuple[float, float]:
    radius = math.sqrt(2.0 * aa.I)
    return radius * math.sin(aa.Theta), radius * math.cos(aa.Theta)


def angle_action_from_point(X: float, P: float) -> ActionAngle:
    return ActionAngle(I=0.5 * (X**2 + P**2), Theta=math.atan2(X, P))


def _hannay_integrand(action: float, gauge: GaugeSolution):
    """p(I, Theta; phi) dx/dphi on the (Theta, phi) box."""
    _, s = _half_angles(gauge)
    radius = math.sqrt(2.0 * action)

    def integrand(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        X = radius * np.sin(theta)
        P = radius * np.cos(theta)
        _, p = _map_arrays(X, P, phi, gauge)
        alpha, beta = np.sin(phi), np.cos(phi)
        # d/dphi of x = (c - i alpha s) X + i beta s P
        dx_dphi = -1j * s * (beta * X + alpha * P)
        return p * dx_dphi

    return integrand


def hannay_bracket(action: float, gauge: GaugeSolution, tol: Optional[float] = None) -> complex:
    """(1/2pi) double integral of p dx/dphi over Theta and phi."""
    value, panels = tensor_gauss_legendre(
        _hannay_integrand(action, gauge), [(0.0, TWO_PI), (0.0, TWO_PI)], tol=tol
    )
    logger.debug(f"Hannay bracket at I={action}: {value} ({panels} panels/axis)")
    return value / TWO_PI


def hannay_angle_quadrature_with_residuals(
    params: ModelParams, gauge: GaugeSolution, tol: Optional[float] = None
) -> Tuple[float, float, float]:
    """(Delta theta_H, |imaginary part|, |bracket(3) - 3 bracket(1)|)."""
    one = hannay_bracket(1.0, gauge, tol)
    two = hannay_bracket(2.0, gauge, tol)
    three = hannay_bracket(3.0, gauge, tol)
    slope = two - one
    dtheta = -slope
    return dtheta.real, abs(dtheta.imag), abs(three - 3.0 * one)


def hannay_angle_quadrature(params: ModelParams, gauge: GaugeSolution, tol: Optional[float] = None) -> float:
    return hannay_angle_quadrature_with_residuals(params, gauge, tol)[0]


def hannay_angle_closed(params: ModelParams, gauge: GaugeSolution) -> float:
    """Delta theta_H = pi (cos eta - 1)."""
    return math.pi * (math.cos(classical_eta(gauge)) - 1.0)


def correspondence_check(
    params: ModelParams,
    n: int,
    gauge: Optional[GaugeSolution] = None,
    space: Optional[FockSpace] = None,
) -> HannayResult:
    """gamma_n (quadrature of <n|i R dR^-1/dt|n>) against (n + 1/2) Delta theta_H (double quadrature) on one branch."""
    gauge = solve_auxiliary(params) if gauge is None else gauge
    space = quadrature_space(n) if space is None else space
    gamma_n = berry_phase_quadrature(gauge, params, n, space)
    dtheta, imaginary, linearity = hannay_angle_quadrature_with_residuals(params, gauge)
    scaled = (n + 0.5) * dtheta
    residual = gamma_n + scaled
    realized_sign = -1 if abs(gamma_n + scaled) <= abs(gamma_n - scaled) else 1
    logger.info(
        f"Correspondence n={n}, branch {gauge.branch:+d}: gamma={gamma_n:.12g}, "
        f"(n+1/2) dtheta={scaled:.12g}, realized sign {realized_sign:+d}"
    )
    return HannayResult(
        dtheta_closed=hannay_angle_closed(params, gauge),
        dtheta_quadrature=dtheta,
        correspondence_residual=residual,
        n=n,
        branch=gauge.branch,
        gamma_n=gamma_n,
        realized_sign=realized_sign,
        imag_residual=imaginary,
        linearity_residual=linearity,
    )


# Trajectories
# ============

def integrate_trajectory(
    params: ModelParams,
    z0: ComplexPhasePoint,
    t0: float,
    t1: float,
    tol: Optional[float] = None,
    gauge: Optional[GaugeSolution] = None,
) -> ClassicalTrajectory:
    """Hamilton's equations on complexified phase space, checked against transform-rotate-untransform."""
    if t1 <= t0:
        raise ValueError(f"t1={t1} must exceed t0={t0}")
    gauge = solve_auxiliary(params) if gauge is None else gauge
    rtol = settings.ode_rtol if tol is None else tol
    atol = settings.ode_atol if tol is None else tol * 1e-2

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        x_dot, p_dot = hamilton_vector_field(y[0], y[1], t, params)
        return np.array([x_dot, p_dot], dtype=np.complex128)

    times, states, _ = integrate_complex_ode(
        rhs, t0, t1, np.array([z0.x, z0.p], dtype=np.complex128), rtol=rtol, atol=atol
    )
    trajectory = np.array(states)

    X0, P0 = inverse_canonical_map(z0.x, z0.p, t0, gauge)
    angle = gauge.Gamma * (t1 - t0)
    X1 = X0 * math.cos(angle) + P0 * math.sin(angle)
    P1 = P0 * math.cos(angle) - X0 * math.sin(angle)
    x1, p1 = canonical_map(X1, P1, t1, gauge)
    analytic = ComplexPhasePoint(x=complex(x1), p=complex(p1), t=t1)
    endpoint_residual = float(max(abs(trajectory[-1, 0] - x1), abs(trajectory[-1, 1] - p1)))

    kernel_X, kernel_P = inverse_canonical_map(trajectory[:, 0], trajectory[:, 1], np.array(times), gauge)
    invariant = kernel_X**2 + kernel_P**2
    drift = float(np.max(np.abs(invariant - invariant[0])))
    logger.info(f"Trajectory over [{t0:.6g}, {t1:.6g}]: endpoint residual {endpoint_residual:.3g}")
    return ClassicalTrajectory(
        times=np.array(times),
        x=trajectory[:, 0],
        p=trajectory[:, 1],
        analytic_endpoint=analytic,
        endpoint_residual=endpoint_residual,
        kernel_invariant_drift=drift,
    )
