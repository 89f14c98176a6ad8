"""
Shared numerical kernels: adaptive quadrature, tensor Gauss-Legendre panels,
Richardson-extrapolated central differences and adaptive Runge-Kutta stepping
of complex ODEs.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import RK45, quad

from app.core.config import settings
from app.core.exceptions import QuadratureNotConverged, StepSizeUnderflow
from app.models.dynamics import StepStats

logger = logging.getLogger(__name__)


def adaptive_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    tol: Optional[float] = None,
    limit: Optional[int] = None,
) -> Tuple[float, float]:
    """QUADPACK Gauss-Kronrod integration of a real integrand; raises if the error bound misses tol."""
    tol = settings.quad_tolerance if tol is None else tol
    limit = settings.quad_limit if limit is None else limit
    result = quad(func, a, b, epsabs=tol, epsrel=0.0, limit=limit, full_output=1)
    value, error = result[0], result[1]
    if len(result) > 3 or not np.isfinite(value) or error > tol:
        message = result[3] if len(result) > 3 else "error bound above tolerance"
        raise QuadratureNotConverged(
            f"quadrature on [{a}, {b}] did not reach {tol:g} (estimate {error:.3g}): {message}"
        )
    return float(value), float(error)


def adaptive_quad_complex(
    func: Callable[[float], complex],
    a: float,
    b: float,
    tol: Optional[float] = None,
) -> Tuple[complex, float]:
    real, real_error = adaptive_quad(lambda t: func(t).real, a, b, tol)
    imag, imag_error = adaptive_quad(lambda t: func(t).imag, a, b, tol)
    return complex(real, imag), max(real_error, imag_error)


def _panel_rule(a: float, b: float, panels: int, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    reference_nodes, reference_weights = leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    points = (mid[:, None] + half[:, None] * reference_nodes[None, :]).ravel()
    weights = (half[:, None] * reference_weights[None, :]).ravel()
    return points, weights


def tensor_gauss_legendre(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    box: Sequence[Tuple[float, float]],
    tol: Optional[float] = None,
    nodes: Optional[int] = None,
    max_panels: Optional[int] = None,
) -> Tuple[complex, int]:
    """Integrate func(u, v) over a rectangle, doubling panels per axis until refinements agree.

    Returns (value, panels per axis).
    """
    tol = settings.quad_tolerance if tol is None else tol
    nodes = settings.gl_nodes if nodes is None else nodes
    max_panels = settings.gl_max_panels if max_panels is None else max_panels
    (u0, u1), (v0, v1) = box

    def evaluate(panels: int) -> complex:
        u, wu = _panel_rule(u0, u1, panels, nodes)
        v, wv = _panel_rule(v0, v1, panels, nodes)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        values = func(uu, vv)
        return complex(np.einsum("i,ij,j->", wu, values, wv))

    panels = 1
    previous = evaluate(panels)
    while panels < max_panels:
        panels *= 2
        current = evaluate(panels)
        change = abs(current - previous)
        logger.debug(f"Gauss-Legendre {panels} panels/axis: value={current}, change={change:.3g}")
        if change < tol:
            return current, panels
        previous = current
    raise QuadratureNotConverged(
        f"tensor Gauss-Legendre did not settle below {tol:g} within {max_panels} panels per axis"
    )


def richardson_central_difference(
    func: Callable[[float], np.ndarray], t: float, h: float
) -> np.ndarray:
    """Fourth-order derivative estimate (4 D(h/2) - D(h)) / 3 from central differences."""
    coarse = (func(t + h) - func(t - h)) / (2.0 * h)
    fine = (func(t + h / 2.0) - func(t - h / 2.0)) / h
    return (4.0 * fine - coarse) / 3.0


def integrate_complex_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    y0: np.ndarray,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
    t_eval: Optional[Sequence[float]] = None,
    max_steps: Optional[int] = None,
) -> Tuple[List[float], List[np.ndarray], StepStats]:
    """Embedded 5(4) Runge-Kutta with local-error step rejection on a complex state.

    Without ``t_eval`` every accepted step is recorded; with it, dense output is
    sampled at the requested times (t0 and t1 always included).
    """
    rtol = settings.ode_rtol if rtol is None else rtol
    atol = settings.ode_atol if atol is None else atol
    max_steps = settings.max_ode_steps if max_steps is None else max_steps
    y0 = np.asarray(y0, dtype=np.complex128)

    solver = RK45(rhs, t0, y0.copy(), t1, rtol=rtol, atol=atol)
    setup_evaluations = solver.nfev
    samples = None if t_eval is None else sorted(float(t) for t in t_eval if t0 < t < t1)

    times: List[float] = [t0]
    states: List[np.ndarray] = [y0.copy()]
    accepted = 0
    cursor = 0
    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"integrator stalled at t={solver.t:.6g}: {message}")
        accepted += 1
        if accepted > max_steps:
            raise StepSizeUnderflow(f"integrator exceeded {max_steps} steps before t={t1}")
        if samples is None:
            times.append(float(solver.t))
            states.append(solver.y.copy())
        else:
            dense = solver.dense_output()
            while cursor < len(samples) and samples[cursor] <= solver.t:
                times.append(samples[cursor])
                states.append(np.asarray(dense(samples[cursor]), dtype=np.complex128))
                cursor += 1
    if samples is not None:
        times.append(float(solver.t))
        states.append(solver.y.copy())

    # each attempted step costs n_stages right-hand-side calls
    attempts = (solver.nfev - setup_evaluations) // solver.n_stages
    stats = StepStats(
        accepted=accepted,
        rejected=max(attempts - accepted, 0),
        evaluations=int(solver.nfev),
    )
    logger.debug(f"RK45 over [{t0}, {t1}]: {stats}")
    return times, states, stats
