"""
Tests for biorthogonal states, time evolution, the Berry phase and the
position representation.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from app.core.exceptions import DimensionMismatch, IndexOutOfRange, NonNormalizable
from app.core.physics_config import ACCEPTANCE_PARAMETERS, DECOUPLED_PARAMETERS
from app.models.fock import FockSpace
from app.models.gauge import ModelParams
from app.services.fock_algebra import build_ladder
from app.services.gauge_engine import build_R, solve_auxiliary
from app.services.quantum_dynamics import (
    apply_metric,
    biorthogonal_coefficients,
    berry_phase_closed,
    berry_phase_from_evolution,
    berry_phase_quadrature_with_residual,
    berry_phase_report,
    coherent_state,
    evolve,
    expectation,
    gauge_solution_basis,
    gauge_solution_state,
    gram_matrix,
    kernel_eigenstate,
    kernel_wavefunction,
    kernel_wavefunctions,
    metric_gram,
    metric_operator,
    metric_residual,
    original_gauge_wavefunction,
    position_overlap,
    quadrature_space,
)

# pi/2 (1 - 3/sqrt(10))
GAMMA_0 = 0.0806080869


def acceptance(branch: int = -1) -> ModelParams:
    return ModelParams(**ACCEPTANCE_PARAMETERS).with_branch(branch)


def test_kernel_eigenstate_range():
    space = FockSpace(cutoff=16, boundary_margin=4)
    assert kernel_eigenstate(11, space)[11] == 1.0
    with pytest.raises(IndexOutOfRange):
        kernel_eigenstate(12, space)


def test_biorthonormality():
    print("🔧 Testing <bra_n|ket_m> = delta_nm...")
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=32, boundary_margin=8)
    for t in (0.0, 0.8, 3.0):
        basis = gauge_solution_basis(params, gauge, 3, t, space)
        assert_allclose(gram_matrix(basis), np.eye(4), atol=1e-10)
    print("✅ Gram matrix is the identity at three times")


def test_biorthogonal_coefficients_pick_out_levels():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=32, boundary_margin=8)
    basis = gauge_solution_basis(params, gauge, 3, 0.5, space)
    assert_allclose(biorthogonal_coefficients(basis[2].ket, basis), np.eye(4)[2], atol=1e-10)
    mixed = 0.6 * basis[0].ket - 0.8j * basis[3].ket
    assert_allclose(biorthogonal_coefficients(mixed, basis), [0.6, 0.0, 0.0, -0.8j], atol=1e-10)


def normalizable_draw(rng, min_cos_eta: float = 0.6) -> ModelParams:
    while True:
        params = ModelParams(
            Omega=rng.uniform(-3.0, 3.0),
            G=rng.uniform(-1.0, 1.0),
            omega=rng.uniform(0.3, 2.0),
            branch=int(rng.choice([-1, 1])),
        )
        if solve_auxiliary(params).cos_eta >= min_cos_eta:
            return params


def test_metric_operator_maps_kets_to_bras():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=32, boundary_margin=8)
    basis = gauge_solution_basis(params, gauge, 2, 1.1, space)
    working = basis[0].space
    chi = metric_operator(gauge, params, 1.1, working)
    assert_allclose(chi.entries, chi.dagger().entries, atol=1e-12)
    top = chi.entries[:16, :16]
    assert np.all(np.linalg.eigvalsh(0.5 * (top + top.conj().T)) > 0.0)
    for state in basis:
        assert metric_residual(state, gauge, params) < 1e-10
        assert_allclose(chi.entries @ state.ket, state.bra, atol=1e-10)
        assert_allclose(apply_metric(gauge, params, 1.1, state.ket, working), state.bra, atol=1e-10)
    assert_allclose(metric_gram(basis, gauge, params), np.eye(3), atol=1e-10)


def test_metric_has_exact_entries():
    params = acceptance()
    gauge = solve_auxiliary(params)
    chi = metric_operator(gauge, params, 0.6, FockSpace(cutoff=32, boundary_margin=8))
    wide = FockSpace(cutoff=256, boundary_margin=8)
    r, _ = build_R(gauge, params, 0.6, wide)
    assert_allclose(chi.entries, (r.entries @ r.entries)[:32, :32], atol=1e-10)

    free = ModelParams(**DECOUPLED_PARAMETERS)
    identity = metric_operator(solve_auxiliary(free), free, 0.3, FockSpace(cutoff=16))
    assert_allclose(identity.entries, np.eye(16), atol=1e-15)

    mirrored = acceptance(+1)
    with pytest.raises(NonNormalizable):
        metric_operator(solve_auxiliary(mirrored), mirrored, 0.0, FockSpace(cutoff=16))


def test_metric_with_wide_columns():
    # |tan(eta/2)| = 0.38: columns of R^-1 reach past level 100
    params = ModelParams(Omega=0.49297, G=-0.81174, omega=1.35607)
    gauge = solve_auxiliary(params)
    assert gauge.normalizable
    basis = gauge_solution_basis(params, gauge, 3, 0.4, FockSpace(cutoff=64, boundary_margin=8))
    for state in basis:
        assert metric_residual(state, gauge, params) < 1e-10
    assert_allclose(metric_gram(basis, gauge, params), np.eye(4), atol=1e-8)


def test_gram_and_metric_on_random_draws():
    print("🔧 Testing biorthonormality and bra = chi ket on 20 draws...")
    rng = np.random.default_rng(31)
    space = FockSpace(cutoff=64, boundary_margin=8)
    worst_gram, worst_metric = 0.0, 0.0
    for _ in range(20):
        params = normalizable_draw(rng)
        gauge = solve_auxiliary(params)
        for t in rng.uniform(0.0, params.period, size=5):
            basis = gauge_solution_basis(params, gauge, 8, t, space)
            worst_gram = max(worst_gram, float(np.max(np.abs(gram_matrix(basis) - np.eye(9)))))
            worst_metric = max(worst_metric, max(metric_residual(state, gauge, params) for state in basis))
    assert worst_gram < 1e-8
    assert worst_metric < 1e-10
    print(f"✅ Gram deviation {worst_gram:.2e}, metric residual {worst_metric:.2e}")


def test_metric_residual_needs_normalizable_branch():
    params = acceptance()
    gauge = solve_auxiliary(params)
    state = gauge_solution_state(params, gauge, 0, 0.0, FockSpace(cutoff=32, boundary_margin=8))
    mirrored = acceptance(+1)
    with pytest.raises(NonNormalizable):
        metric_residual(state, solve_auxiliary(mirrored), mirrored)


def test_coherent_state():
    space = FockSpace(cutoff=48)
    alpha = 0.3 + 0.2j
    psi = coherent_state(alpha, space)
    assert_allclose(np.linalg.norm(psi), 1.0, atol=1e-14)
    annihilation, _ = build_ladder(space)
    assert_allclose(expectation(annihilation, psi), alpha, atol=1e-12)


def test_evolution_reproduces_gauge_solution_over_a_period():
    print("🔧 Evolving a gauge-solution ket over one period...")
    params = acceptance()
    gauge = solve_auxiliary(params)
    start = gauge_solution_state(params, gauge, 1, 0.0, FockSpace(cutoff=32, boundary_margin=8))
    working = start.space
    period = params.period
    result = evolve(params, start.ket, 0.0, period, working, tol=1e-10)
    expected = gauge_solution_state(params, gauge, 1, period, working, policy="fixed").ket
    assert_allclose(result.final_state, expected, atol=1e-6)
    assert result.step_controller_stats.accepted > 0
    print(f"✅ {result.step_controller_stats.accepted} accepted steps")


def test_evolution_is_not_unitary():
    print("🔧 Following the norm of (e_0 + e_2)/sqrt(2) over one period...")
    params = acceptance()
    space = FockSpace(cutoff=32, boundary_margin=8)
    psi0 = np.zeros(32, dtype=np.complex128)
    psi0[[0, 2]] = 1.0 / math.sqrt(2.0)
    samples = np.linspace(0.0, params.period, 65)
    result = evolve(params, psi0, 0.0, params.period, space, tol=1e-10, t_eval=samples)
    norms = result.norms()
    assert len(norms) == 65
    assert norms[0] == pytest.approx(1.0, abs=1e-14)
    assert norms.max() - norms.min() > 1e-3
    assert result.truncation_sensitivity < 1e-6
    print(f"✅ norm ranges over [{norms.min():.4f}, {norms.max():.4f}]")


def test_evolution_is_linear():
    params = acceptance()
    space = FockSpace(cutoff=24, boundary_margin=8)
    psi = coherent_state(0.4, space)
    phi = coherent_state(-0.2 + 0.3j, space)
    a, b = 0.7 - 0.2j, -1.3
    combined = evolve(params, a * psi + b * phi, 0.0, 1.0, space, tol=1e-10).final_state
    separate = (
        a * evolve(params, psi, 0.0, 1.0, space, tol=1e-10).final_state
        + b * evolve(params, phi, 0.0, 1.0, space, tol=1e-10).final_state
    )
    assert_allclose(combined, separate, atol=1e-8)
    doubled = evolve(params, 2.0 * psi, 0.0, 1.0, space, tol=1e-10).final_state
    assert np.linalg.norm(doubled) > 1.5


def test_evolution_without_drive_is_a_phase():
    params = ModelParams(**DECOUPLED_PARAMETERS)
    space = FockSpace(cutoff=16, boundary_margin=4)
    psi0 = coherent_state(0.5, space)
    result = evolve(params, psi0, 0.0, 2.0, space, tol=1e-11)
    # H = Omega Sz is diagonal with Omega (n + 1/2)/2
    expected = np.exp(-1j * params.Omega * (np.arange(16) + 0.5) / 2.0 * 2.0) * psi0
    assert_allclose(result.final_state, expected, atol=1e-9)
    assert_allclose(result.norms(), 1.0, atol=1e-12)


def test_midpoint_and_rk45_agree():
    params = acceptance()
    space = FockSpace(cutoff=24, boundary_margin=8)
    psi0 = coherent_state(0.3, space)
    adaptive = evolve(params, psi0, 0.0, 1.0, space, tol=1e-10)
    midpoint = evolve(params, psi0, 0.0, 1.0, space, method="midpoint", steps=2000)
    assert midpoint.method == "midpoint"
    assert len(midpoint.times) == 2001
    assert_allclose(midpoint.final_state, adaptive.final_state, atol=1e-5)


def test_evolve_rejects_bad_input():
    params = acceptance()
    space = FockSpace(cutoff=16)
    with pytest.raises(ValueError):
        evolve(params, np.zeros(16), 1.0, 0.5, space)
    with pytest.raises(DimensionMismatch):
        evolve(params, np.zeros(12), 0.0, 1.0, space)


def test_berry_phase_three_routes():
    print("🔧 Testing the Berry phase by closed form, quadrature and evolution...")
    params = acceptance()
    gauge = solve_auxiliary(params)
    assert_allclose(berry_phase_closed(gauge, params, 0), GAMMA_0, atol=1e-7)
    report = berry_phase_report(params, gauge, 0, FockSpace(cutoff=32, boundary_margin=8))
    assert_allclose(report.gamma_quadrature, report.gamma_closed, atol=1e-8)
    assert report.quadrature_imag_residual < 1e-8
    assert_allclose(report.gamma_evolution, report.gamma_closed, atol=1e-6)
    print(f"✅ gamma_0 = {report.gamma_closed:.10f}")
    for n in (1, 2, 5):
        report = berry_phase_report(params, gauge, n, FockSpace(cutoff=32, boundary_margin=8))
        assert_allclose(report.gamma_closed, (2 * n + 1) * GAMMA_0, atol=1e-7)
        assert_allclose(report.gamma_quadrature, report.gamma_closed, atol=1e-8)
        assert_allclose(report.gamma_evolution, report.gamma_closed, atol=1e-6)
        print(f"✅ gamma_{n} = {report.gamma_closed:.10f} by all three routes")


def test_berry_phase_report_takes_quadrature_tolerance():
    params = acceptance()
    gauge = solve_auxiliary(params)
    report = berry_phase_report(params, gauge, 1, FockSpace(cutoff=32, boundary_margin=8), quad_tol=1e-12)
    assert_allclose(report.gamma_quadrature, 3.0 * GAMMA_0, atol=1e-9)
    assert report.quadrature_imag_residual < 1e-12


def test_berry_phase_routes_on_random_draws():
    rng = np.random.default_rng(7)
    space = FockSpace(cutoff=32, boundary_margin=8)
    for _ in range(10):
        params = ModelParams(
            Omega=rng.uniform(1.5, 3.0),
            G=rng.uniform(-0.5, 0.5),
            omega=rng.uniform(0.5, 1.5),
        )
        gauge = solve_auxiliary(params)
        for n in (0, 2):
            report = berry_phase_report(params, gauge, n, space)
            assert_allclose(report.gamma_quadrature, report.gamma_closed, atol=1e-8)
            assert_allclose(report.gamma_evolution, report.gamma_closed, atol=1e-6)


def test_berry_phase_is_linear_in_level():
    params = acceptance()
    gauge = solve_auxiliary(params)
    for n in (1, 2, 5):
        quadrature, imaginary = berry_phase_quadrature_with_residual(gauge, params, n, quadrature_space(n))
        assert_allclose(quadrature, (2 * n + 1) * GAMMA_0, atol=1e-6)
        assert imaginary < 1e-8


def test_berry_phase_on_mirrored_branch():
    params = acceptance(+1)
    gauge = solve_auxiliary(params)
    assert_allclose(berry_phase_closed(gauge, params, 0), 0.5 * math.pi * (1.0 + 3.0 / math.sqrt(10.0)))
    quadrature, _ = berry_phase_quadrature_with_residual(gauge, params, 0, quadrature_space(0))
    assert_allclose(quadrature, berry_phase_closed(gauge, params, 0), atol=1e-8)


def test_berry_phase_vanishes_without_drive():
    params = ModelParams(**DECOUPLED_PARAMETERS)
    gauge = solve_auxiliary(params)
    assert berry_phase_closed(gauge, params, 3) == 0.0
    quadrature, _ = berry_phase_quadrature_with_residual(gauge, params, 3, quadrature_space(3))
    assert abs(quadrature) < 1e-12
    evolution = berry_phase_from_evolution(params, gauge, 0, FockSpace(cutoff=16, boundary_margin=4))
    assert abs(evolution.gamma) < 1e-6


def test_kernel_wavefunctions_are_orthonormal():
    print("🔧 Testing kernel oscillator wavefunctions...")
    Gamma = 0.5 * (math.sqrt(10.0) - 1.0)
    grid = np.linspace(-14.0, 14.0, 4001)
    rows = kernel_wavefunctions(6, Gamma, grid)
    overlaps = trapezoid(rows[:, None, :] * rows[None, :, :], grid, axis=-1)
    assert_allclose(overlaps, np.eye(6), atol=1e-10)
    ground = (Gamma / math.pi) ** 0.25 * np.exp(-Gamma * grid**2 / 2.0)
    assert_allclose(kernel_wavefunction(0, Gamma, grid).real, ground, atol=1e-14)
    print("✅ Hermite functions orthonormal on the grid")


def test_wavefunctions_need_positive_gamma():
    grid = np.linspace(-5.0, 5.0, 101)
    with pytest.raises(NonNormalizable):
        kernel_wavefunctions(3, -1.0, grid)
    params = acceptance(+1)
    gauge = solve_auxiliary(params)
    with pytest.raises(NonNormalizable):
        original_gauge_wavefunction(params, gauge, 0, 0.0, grid, FockSpace(cutoff=16, boundary_margin=4))


def test_original_gauge_wavefunction_is_quasi_periodic():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=32, boundary_margin=8)
    grid = np.linspace(-8.0, 8.0, 401)
    period = params.period
    start = original_gauge_wavefunction(params, gauge, 1, 0.0, grid, space)
    later = original_gauge_wavefunction(params, gauge, 1, period, grid, space)
    phase = np.exp(-1j * gauge.Gamma * 1.5 * period)
    assert_allclose(later, phase * start, atol=1e-8)


def test_position_overlap_is_one():
    params = acceptance()
    gauge = solve_auxiliary(params)
    grid = np.linspace(-16.0, 16.0, 6001)
    overlap = position_overlap(params, gauge, 0, 0.9, grid, FockSpace(cutoff=32, boundary_margin=8))
    assert_allclose(overlap, 1.0, atol=1e-6)


if __name__ == "__main__":
    test_kernel_eigenstate_range()
    test_biorthonormality()
    test_biorthogonal_coefficients_pick_out_levels()
    test_metric_operator_maps_kets_to_bras()
    test_metric_has_exact_entries()
    test_metric_with_wide_columns()
    test_gram_and_metric_on_random_draws()
    test_metric_residual_needs_normalizable_branch()
    test_coherent_state()
    test_evolution_reproduces_gauge_solution_over_a_period()
    test_evolution_is_not_unitary()
    test_evolution_is_linear()
    test_evolution_without_drive_is_a_phase()
    test_midpoint_and_rk45_agree()
    test_evolve_rejects_bad_input()
    test_berry_phase_three_routes()
    test_berry_phase_report_takes_quadrature_tolerance()
    test_berry_phase_routes_on_random_draws()
    test_berry_phase_is_linear_in_level()
    test_berry_phase_on_mirrored_branch()
    test_berry_phase_vanishes_without_drive()
    test_kernel_wavefunctions_are_orthonormal()
    test_wavefunctions_need_positive_gamma()
    test_original_gauge_wavefunction_is_quasi_periodic()
    test_position_overlap_is_one()
    print("\n🎉 Quantum dynamics tests completed!")
