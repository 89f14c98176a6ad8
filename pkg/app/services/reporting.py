"""
Assembly of ReportRecords from library calls, one builder per command.

Every number placed in a record comes from a service function; the builders only
compare routes against each other and attach tolerance flags.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple, TypeVar

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import CoefficientMismatch, PTGaugeError
from app.core.physics_config import EXIT_INVALID_INPUT
from app.models.gauge import GaugeSolution, ModelParams
from app.schemas.report import ErrorDetail, Provenance, ReportRecord, RunConfig
from app.services.classical_mechanics import (
    classical_hamiltonian_xp,
    correspondence_check,
    hannay_angle_closed,
    hannay_angle_quadrature_with_residuals,
    transformed_hamiltonian,
    verify_gauge_equivalence,
)
from app.services.fock_algebra import commutator_residuals, parity_residuals
from app.services.gauge_engine import (
    auxiliary_residual,
    build_hamiltonian,
    build_R,
    floquet_spectrum,
    kernel_coefficients,
    kernel_residual,
    pt_check,
    pt_check_operator,
    solve_auxiliary,
    spectrum,
    verify_bch,
)
from app.services.quantum_dynamics import (
    berry_phase_closed,
    berry_phase_from_evolution,
    berry_phase_quadrature_with_residual,
    coherent_state,
    evolve,
    expectation,
    gauge_solution_basis,
    gauge_solution_state,
    gram_matrix,
    metric_operator,
    metric_residual,
    quadrature_space,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Coherent amplitude used by the phase-space expectation check
COHERENT_ALPHA = 0.3 + 0.2j


def error_detail(exc: Exception) -> ErrorDetail:
    if isinstance(exc, PTGaugeError):
        return ErrorDetail(detail=exc.detail, error_code=exc.error_code, exit_code=exc.exit_code)
    return ErrorDetail(detail=str(exc), error_code="INVALID_INPUT", exit_code=EXIT_INVALID_INPUT)


def _attempt(errors: List[ErrorDetail], func: Callable[[], T]) -> Optional[T]:
    """Run one route; a library error is recorded instead of aborting the record."""
    try:
        return func()
    except PTGaugeError as exc:
        logger.warning(f"{exc.error_code}: {exc.detail}")
        errors.append(error_detail(exc))
        return None


def derived_quantities(gauge: GaugeSolution) -> Dict[str, Optional[float]]:
    return {"Delta": gauge.Delta, "eta": gauge.eta, "Gamma": gauge.Gamma}


def _close(value: Optional[float], target: float, tol: float) -> bool:
    return value is not None and abs(value - target) <= tol * max(1.0, abs(target))


def _record(
    command: str,
    config: RunConfig,
    gauge: Optional[GaugeSolution],
    outputs: Dict[str, Optional[float]],
    flags: Dict[str, bool],
    errors: Optional[List[ErrorDetail]] = None,
    cutoff: Optional[int] = None,
    certified: Optional[bool] = None,
    notes: Optional[List[str]] = None,
) -> ReportRecord:
    return ReportRecord(
        command=command,
        inputs=config.echo(),
        derived=derived_quantities(gauge) if gauge is not None else {},
        outputs=outputs,
        tolerance_met=flags,
        provenance=Provenance(
            branch=config.params.branch,
            cutoff=cutoff,
            cutoff_certified=certified,
            tolerances=config.tolerances(),
            notes=notes or [],
        ),
        errors=errors or [],
    )


# Spectrum and gauge
# ==================

def spectrum_record(config: RunConfig) -> ReportRecord:
    """E_n = (n + 1/2) Gamma for n < nmax, checked against Floquet quasi-energies when the branch allows it."""
    gauge = solve_auxiliary(config.params)
    energies = spectrum(gauge, config.n_max)
    errors: List[ErrorDetail] = []
    notes: List[str] = []
    outputs = {f"E_{n}": energy for n, energy in enumerate(energies)}

    if gauge.normalizable:
        quasi = _attempt(
            errors, lambda: floquet_spectrum(config.params, gauge, config.n_max, space=config.space)
        )
        flags = {
            f"E_{n}": quasi is not None and _close(quasi[n], energy, config.tol_assert)
            for n, energy in enumerate(energies)
        }
        notes.append("checked against Floquet quasi-energies")
    else:
        flags = {key: True for key in outputs}
        notes.append("closed form only: the Fock-space route needs the normalizable branch")
    return _record("spectrum", config, gauge, outputs, flags, errors, notes=notes)


def gauge_record(config: RunConfig) -> ReportRecord:
    params = config.params
    gauge = solve_auxiliary(params)
    coefficients = kernel_coefficients(params, gauge)
    errors: List[ErrorDetail] = []
    notes: List[str] = []
    aux = auxiliary_residual(params, gauge)
    outputs: Dict[str, Optional[float]] = {
        "Delta": gauge.Delta,
        "eta": gauge.eta,
        "Gamma": gauge.Gamma,
        "sin_eta": gauge.sin_eta,
        "cos_eta": gauge.cos_eta,
        "normalizable": 1.0 if gauge.normalizable else 0.0,
        "kernel_sz": coefficients.sz,
        "kernel_l": coefficients.l,
        "auxiliary_residual": aux,
    }
    flags = {key: True for key in outputs}
    flags["kernel_sz"] = _close(coefficients.sz, 2.0 * gauge.Gamma, config.tol_assert)
    flags["kernel_l"] = abs(coefficients.l) <= config.tol_assert
    flags["auxiliary_residual"] = aux <= config.tol_assert

    if gauge.normalizable:
        residual = _attempt(
            errors,
            lambda: kernel_residual(params, gauge, 0.0, config.space, policy=config.cutoff_policy),
        )
        outputs["kernel_residual"] = residual
        flags["kernel_residual"] = residual is not None and residual <= config.tol_assert
    else:
        notes.append("kernel_residual skipped: R^-1|n> is not square-summable on this branch")
    return _record("gauge", config, gauge, outputs, flags, errors, notes=notes)


# Phases
# ======

def _quadrature_phase(config: RunConfig, gauge: GaugeSolution) -> Tuple[float, float]:
    return berry_phase_quadrature_with_residual(
        gauge, config.params, config.n, quadrature_space(config.n), tol=config.tol_quad
    )


def berry_record(config: RunConfig) -> ReportRecord:
    """Berry phase of level n by the closed form, the derivative-term quadrature and evolution."""
    params = config.params
    gauge = solve_auxiliary(params)
    errors: List[ErrorDetail] = []
    closed = berry_phase_closed(gauge, params, config.n)
    quadrature, imaginary = _quadrature_phase(config, gauge)
    evolution = _attempt(
        errors,
        lambda: berry_phase_from_evolution(
            params, gauge, config.n, config.space, tol=config.tol_ode, policy=config.cutoff_policy
        ),
    )
    outputs: Dict[str, Optional[float]] = {
        "gamma_closed": closed,
        "gamma_quadrature": quadrature,
        "quadrature_imag_residual": imaginary,
        "gamma_evolution": evolution.gamma if evolution else None,
        "gamma_evolution_raw": evolution.raw if evolution else None,
    }
    flags = {
        "gamma_closed": True,
        "gamma_quadrature": _close(quadrature, closed, config.tol_assert),
        "quadrature_imag_residual": imaginary <= config.tol_quad,
        "gamma_evolution": evolution is not None
        and _close(evolution.gamma, closed, settings.evolution_tolerance),
        "gamma_evolution_raw": evolution is not None,
    }
    notes = [f"evolution phase shifted by {evolution.shift} x 2pi"] if evolution else []
    return _record(
        "berry",
        config,
        gauge,
        outputs,
        flags,
        errors,
        cutoff=evolution.cutoff if evolution else None,
        certified=evolution is not None,
        notes=notes,
    )


def hannay_record(config: RunConfig) -> ReportRecord:
    params = config.params
    gauge = solve_auxiliary(params)
    closed = hannay_angle_closed(params, gauge)
    quadrature, imaginary, linearity = hannay_angle_quadrature_with_residuals(
        params, gauge, tol=config.tol_quad
    )
    outputs = {
        "hannay_closed": closed,
        "hannay_quadrature": quadrature,
        "hannay_imag_residual": imaginary,
        "linearity_residual": linearity,
    }
    flags = {
        "hannay_closed": True,
        "hannay_quadrature": _close(quadrature, closed, config.tol_assert),
        "hannay_imag_residual": imaginary <= config.tol_quad,
        "linearity_residual": linearity <= config.tol_assert,
    }
    return _record("hannay", config, gauge, outputs, flags)


def correspond_record(config: RunConfig) -> ReportRecord:
    gauge = solve_auxiliary(config.params)
    result = correspondence_check(config.params, config.n, gauge=gauge)
    outputs = {
        "gamma_quadrature": result.gamma_n,
        "hannay_quadrature": result.dtheta_quadrature,
        "hannay_closed": result.dtheta_closed,
        "correspondence_residual": result.correspondence_residual,
        "realized_sign": float(result.realized_sign),
    }
    flags = {
        "gamma_quadrature": True,
        "hannay_quadrature": _close(result.dtheta_quadrature, result.dtheta_closed, config.tol_assert),
        "hannay_closed": True,
        "correspondence_residual": abs(result.correspondence_residual) <= config.tol_assert,
        "realized_sign": True,
    }
    notes = [f"realized relation: gamma_n = {result.realized_sign:+d} (n + 1/2) dtheta_H"]
    return _record("correspond", config, gauge, outputs, flags, notes=notes)


# Evolution
# =========

def evolve_records(config: RunConfig) -> List[ReportRecord]:
    """Norm and pairing with the gauge-solution bra along an evolved gauge-solution ket."""
    params = config.params
    gauge = solve_auxiliary(params)
    initial = gauge_solution_state(params, gauge, config.n, 0.0, config.space, policy=config.cutoff_policy)
    working = initial.space
    t_end = config.periods * params.period
    samples = np.linspace(0.0, t_end, config.samples)
    result = evolve(params, initial.ket, 0.0, t_end, working, tol=config.tol_ode, t_eval=samples)

    tolerance = settings.evolution_tolerance
    records = []
    for t, psi in zip(result.times, result.states):
        expected = gauge_solution_state(params, gauge, config.n, t, working, policy="fixed")
        overlap = complex(np.vdot(expected.bra, psi))
        norm = float(np.linalg.norm(psi))
        expected_norm = float(np.linalg.norm(expected.ket))
        outputs = {"t": t, "norm": norm, "overlap_re": overlap.real, "overlap_im": overlap.imag}
        flags = {
            "t": True,
            "norm": _close(norm, expected_norm, tolerance),
            "overlap_re": abs(overlap.real - 1.0) <= tolerance,
            "overlap_im": abs(overlap.imag) <= tolerance,
        }
        records.append(
            _record(
                "evolve",
                config,
                gauge,
                outputs,
                flags,
                cutoff=working.cutoff,
                certified=result.truncation_sensitivity <= tolerance,
            )
        )
    return records


# Verification suite
# ==================

def _verification_times(params: ModelParams) -> List[float]:
    period = params.period
    return [0.0, period / 7.0, period / 3.0, period / 2.0]


def verify_record(config: RunConfig) -> ReportRecord:
    """Every identity of the pipeline as a named residual; a check passes below tol_assert."""
    params = config.params
    gauge = solve_auxiliary(params)
    space = config.space
    times = _verification_times(params)
    errors: List[ErrorDetail] = []
    notes: List[str] = []
    checks: Dict[str, Optional[float]] = {}

    for name, value in commutator_residuals(space).items():
        checks[f"commutator_{name}"] = value
    checks.update(parity_residuals(space))
    checks["pt_hamiltonian"] = max(pt_check(params, t, space) for t in times)

    coefficients = kernel_coefficients(params, gauge)
    checks["auxiliary"] = auxiliary_residual(params, gauge)
    checks["kernel_l_coefficient"] = abs(coefficients.l)
    checks["kernel_sz_coefficient"] = abs(coefficients.sz - 2.0 * gauge.Gamma)

    cutoff = None
    if gauge.normalizable:
        checks["pt_transformation"] = max(
            pt_check_operator(lambda time: build_R(gauge, params, time, space)[0], t) for t in times
        )
        bch = {}
        for t in times:
            residuals = _attempt(
                errors,
                lambda: verify_bch(
                    params, gauge, t, space, policy=config.cutoff_policy, inject_fault=config.inject_fault
                ),
            )
            if residuals is None:
                break
            for key, value in residuals.as_dict().items():
                bch[key] = max(bch.get(key, 0.0), value)
        checks.update(bch)

        checks["kernel_diagonal"] = _attempt(
            errors,
            lambda: max(
                kernel_residual(
                    params, gauge, t, space, policy=config.cutoff_policy, inject_fault=config.inject_fault
                )
                for t in times
            ),
        )

        t_check = times[1]
        basis = _attempt(
            errors,
            lambda: gauge_solution_basis(params, gauge, config.n_max, t_check, space, policy=config.cutoff_policy),
        )
        if basis is not None:
            cutoff = basis[0].space.cutoff
            notes.append(f"cutoff policy {config.cutoff_policy}: working cutoff {cutoff}, requested {space.cutoff}")
            gram = gram_matrix(basis)
            checks["biorthonormality"] = float(np.max(np.abs(gram - np.eye(len(basis)))))
            checks["metric"] = _attempt(errors, lambda: max(metric_residual(state, gauge, params) for state in basis))
            metric = _attempt(errors, lambda: metric_operator(gauge, params, t_check, basis[0].space))
            if metric is not None:
                block = metric.entries[: cutoff // 2, : cutoff // 2]
                checks["metric_hermitian"] = float(
                    np.max(np.abs(block - block.conj().T)) / max(1.0, float(np.max(np.abs(block))))
                )
    else:
        notes.append("Fock-space similarity checks skipped: R^-1|n> is not square-summable on this branch")

    psi = coherent_state(COHERENT_ALPHA, space)
    for t in times[:2]:
        quantum = expectation(build_hamiltonian(params, t, space), psi)
        classical = complex(
            classical_hamiltonian_xp(
                math.sqrt(2.0) * COHERENT_ALPHA.real, math.sqrt(2.0) * COHERENT_ALPHA.imag, t, params
            )
        )
        deviation = abs(quantum - classical - params.Omega / 4.0)
        checks["coherent_state"] = max(checks.get("coherent_state", 0.0), deviation)

    checks["classical_equivalence"] = verify_gauge_equivalence(params, gauge, samples=64, seed=0)
    try:
        form = transformed_hamiltonian(params, gauge, tol=config.tol_assert)
        checks["classical_coefficients"] = form.max_deviation
    except CoefficientMismatch as exc:
        checks["classical_coefficients"] = abs(exc.value - exc.expected)

    flags = {name: value is not None and value <= config.tol_assert for name, value in checks.items()}
    failed = [name for name, met in flags.items() if not met]
    if failed:
        logger.warning(f"Verification failed: {', '.join(failed)}")
    else:
        logger.info(f"All {len(flags)} verification checks passed")
    return _record("verify", config, gauge, checks, flags, errors, cutoff=cutoff, notes=notes)


# Sweeps
# ======

def evaluate_quantity(config: RunConfig, gauge: GaugeSolution, quantity: str) -> Tuple[float, bool]:
    """One sweep quantity and its tolerance flag at the config's parameters."""
    params = config.params
    n = config.n
    if quantity == "Gamma":
        return gauge.Gamma, True
    if quantity == "E_n":
        return spectrum(gauge, n + 1)[n], True
    closed = berry_phase_closed(gauge, params, n)
    if quantity == "gamma_closed":
        return closed, True
    if quantity == "gamma_quadrature":
        value, imaginary = _quadrature_phase(config, gauge)
        return value, _close(value, closed, config.tol_assert) and imaginary <= config.tol_quad
    if quantity == "gamma_evolution":
        phase = berry_phase_from_evolution(
            params, gauge, n, config.space, tol=config.tol_ode, policy=config.cutoff_policy
        )
        return phase.gamma, _close(phase.gamma, closed, settings.evolution_tolerance)
    if quantity == "hannay_closed":
        return hannay_angle_closed(params, gauge), True
    if quantity == "hannay_quadrature":
        value, imaginary, _ = hannay_angle_quadrature_with_residuals(params, gauge, tol=config.tol_quad)
        closed_angle = hannay_angle_closed(params, gauge)
        return value, _close(value, closed_angle, config.tol_assert) and imaginary <= config.tol_quad
    if quantity == "correspondence_residual":
        result = correspondence_check(params, n, gauge=gauge)
        return result.correspondence_residual, abs(result.correspondence_residual) <= config.tol_assert
    raise ValueError(f"unknown sweep quantity {quantity!r}")


def sweep_point_record(config: RunConfig, value: float) -> ReportRecord:
    """Record for one grid point; failures leave the quantity null and attach the error."""
    grid = config.sweep
    quantity = grid.quantity
    inputs = config.echo()
    inputs["sweep_parameter"] = grid.parameter
    inputs["sweep_value"] = value
    derived: Dict[str, Optional[float]] = {"Delta": None, "eta": None, "Gamma": None}
    errors: List[ErrorDetail] = []
    result: Optional[float] = None
    met = False
    swept = {**config.params.model_dump(), grid.field: value}
    inputs.update({key: swept[key] for key in ("Omega", "G", "omega")})
    try:
        params = ModelParams(**swept)
        point = config.with_params(params)
        gauge = solve_auxiliary(params)
        derived = derived_quantities(gauge)
        result, met = evaluate_quantity(point, gauge, quantity)
    except (PTGaugeError, ValidationError) as exc:
        logger.warning(f"Sweep point {grid.parameter}={value:g} failed: {exc}")
        errors.append(error_detail(exc))
    return ReportRecord(
        command="sweep",
        inputs=inputs,
        derived=derived,
        outputs={quantity: result},
        tolerance_met={quantity: met},
        provenance=Provenance(branch=config.params.branch, tolerances=config.tolerances()),
        errors=errors,
    )
