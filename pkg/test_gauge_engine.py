"""
Tests for the auxiliary equation, the transformation operator R(t) and the
reduction of H(t) to the static kernel.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import CutoffNotConverged, DegenerateParameters, IndexOutOfRange
from app.core.physics_config import ACCEPTANCE_PARAMETERS, DECOUPLED_PARAMETERS
from app.models.fock import FockSpace
from app.models.gauge import ModelParams
from app.services.gauge_engine import (
    auxiliary_residual,
    build_hamiltonian,
    build_R,
    certify_space,
    derivative_term_closed,
    derivative_term_numeric,
    estimated_cutoff,
    floquet_spectrum,
    gauge_transform,
    instantaneous_spectrum,
    kernel_coefficients,
    kernel_residual,
    pt_check,
    pt_check_operator,
    solve_auxiliary,
    spectrum,
    transformation_column,
    verify_bch,
)

SQRT10 = math.sqrt(10.0)


def acceptance(branch: int = -1) -> ModelParams:
    return ModelParams(**ACCEPTANCE_PARAMETERS).with_branch(branch)


def test_auxiliary_solution_at_acceptance_parameters():
    print("🔧 Solving the auxiliary equation...")
    params = acceptance()
    gauge = solve_auxiliary(params)
    assert_allclose(gauge.Delta, SQRT10)
    assert_allclose(gauge.sin_eta, -1.0 / SQRT10)
    assert_allclose(gauge.cos_eta, 3.0 / SQRT10)
    assert_allclose(gauge.Gamma, (SQRT10 - 1.0) / 2.0)
    assert gauge.normalizable
    assert auxiliary_residual(params, gauge) < 1e-15
    print(f"✅ branch -1: eta={gauge.eta:.10f}, Gamma={gauge.Gamma:.10f}")

    mirrored = solve_auxiliary(params.mirrored())
    assert_allclose(mirrored.Gamma, -(SQRT10 + 1.0) / 2.0)
    assert_allclose(mirrored.cos_eta, -3.0 / SQRT10)
    assert not mirrored.normalizable
    assert auxiliary_residual(params.mirrored(), mirrored) < 1e-15
    print(f"✅ branch +1: eta={mirrored.eta:.10f}, Gamma={mirrored.Gamma:.10f}")


def test_decoupled_limit():
    params = ModelParams(**DECOUPLED_PARAMETERS)
    gauge = solve_auxiliary(params)
    assert gauge.eta == 0.0
    assert_allclose(gauge.Gamma, params.Omega / 2.0)
    assert_allclose(spectrum(gauge, 3), [(n + 0.5) * params.Omega / 2.0 for n in range(3)])
    assert solve_auxiliary(params.mirrored()).eta == math.pi


def test_degenerate_parameters():
    with pytest.raises(DegenerateParameters):
        solve_auxiliary(ModelParams(Omega=-1.0, G=0.0, omega=1.0))
    # omega + Omega = 0 alone is fine
    gauge = solve_auxiliary(ModelParams(Omega=-1.0, G=0.5, omega=1.0))
    assert_allclose(abs(gauge.eta), math.pi / 2.0)


def test_kernel_coefficients_both_branches():
    print("🔧 Testing closed-form kernel coefficients...")
    rng = np.random.default_rng(11)
    for _ in range(20):
        params = ModelParams(
            Omega=rng.uniform(-3.0, 3.0),
            G=rng.uniform(-1.0, 1.0),
            omega=rng.uniform(0.3, 2.0),
            branch=int(rng.choice([-1, 1])),
        )
        gauge = solve_auxiliary(params)
        coefficients = kernel_coefficients(params, gauge)
        assert abs(coefficients.l) < 1e-12
        assert_allclose(coefficients.sz, 2.0 * gauge.Gamma, atol=1e-12)
    print("✅ H' = 2 Gamma Sz with no S+- admixture on 20 draws")


def test_spectrum():
    gauge = solve_auxiliary(acceptance())
    assert_allclose(spectrum(gauge, 3), [0.5 * gauge.Gamma, 1.5 * gauge.Gamma, 2.5 * gauge.Gamma])
    with pytest.raises(IndexOutOfRange):
        spectrum(gauge, 0)


def test_kernel_reduction_is_diagonal():
    print("🔧 Testing H' = R H R^-1 - i R dR^-1/dt...")
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=32, boundary_margin=8)
    period = params.period
    for t in (0.0, period / 7.0, period / 3.0, period / 2.0):
        residual = kernel_residual(params, gauge, t, space, policy="auto")
        print(f"✅ t={t:.4f}: max |H' - Gamma(n+1/2)| = {residual:.2e}")
        assert residual < 1e-8


def test_kernel_reduction_with_numeric_derivative():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=24, boundary_margin=8)
    transformed = gauge_transform(params, gauge, params.period / 5.0, space, derivative="analytic")
    expected = np.diag(gauge.Gamma * (np.arange(24) + 0.5))
    assert_allclose(transformed.interior_block(), expected[:16, :16], atol=1e-8)


def test_mirrored_branch_is_not_certifiable():
    params = acceptance(+1)
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=32, boundary_margin=8)
    with pytest.raises(CutoffNotConverged):
        gauge_transform(params, gauge, 0.0, space, policy="auto")
    working, certificate = certify_space(gauge, params, 4, space, policy="fixed")
    assert working == space
    assert not certificate.converged


def test_certify_space_doubles_cutoff():
    params = acceptance()
    gauge = solve_auxiliary(params)
    working, certificate = certify_space(gauge, params, 20, FockSpace(cutoff=8, boundary_margin=2))
    assert certificate.converged
    assert certificate.tail < 1e-10
    assert working.cutoff >= 44
    assert working.cutoff == certificate.cutoff


def test_fixed_cutoff_that_misses_the_tail_is_rejected():
    params = ModelParams(Omega=1.0, G=0.6, omega=1.0)
    gauge = solve_auxiliary(params)
    assert gauge.normalizable
    with pytest.raises(CutoffNotConverged) as info:
        certify_space(gauge, params, 2, FockSpace(cutoff=16, boundary_margin=4), policy="fixed")
    assert "auto" in str(info.value)
    needed = estimated_cutoff(gauge, 2, 1e-10)
    assert needed is not None and needed > 16
    working, certificate = certify_space(gauge, params, 2, FockSpace(cutoff=16, boundary_margin=4), policy="auto")
    assert certificate.converged
    assert working.cutoff >= 16


def test_cutoff_limit_names_the_needed_size():
    # cos(eta) = 0.066: columns decay like 0.94^(k/2)
    params = ModelParams(Omega=-2.49, G=-0.53, omega=2.42, branch=1)
    gauge = solve_auxiliary(params)
    assert gauge.normalizable
    with pytest.raises(CutoffNotConverged) as info:
        certify_space(gauge, params, 4, FockSpace(cutoff=64, boundary_margin=8), max_cutoff=256)
    assert "PTGAUGE_MAX_CUTOFF" in str(info.value)
    assert "levels needed" in str(info.value)
    assert estimated_cutoff(solve_auxiliary(params.mirrored()), 4, 1e-10) is None


def test_transformation_column_matches_matrix():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=40, boundary_margin=4)
    r, r_inverse = build_R(gauge, params, 0.7, space)
    for n in (0, 3, 6):
        assert_allclose(transformation_column(gauge, params, 0.7, n, space, inverse=True), r_inverse.entries[:, n], atol=1e-13)
        assert_allclose(transformation_column(gauge, params, 0.7, n, space, inverse=False), r.entries[:, n], atol=1e-13)


def test_R_is_hermitian_and_inverts_on_low_block():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=64, boundary_margin=16)
    r, r_inverse = build_R(gauge, params, 1.3, space)
    assert_allclose(r.entries[:32, :32], r.dagger().entries[:32, :32], rtol=1e-12, atol=1e-12)
    product = (r @ r_inverse).interior_block(16)
    assert_allclose(product, np.eye(16), atol=1e-10)


def test_ordered_and_eigh_exponentials_agree():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=48, boundary_margin=16)
    ordered, _ = build_R(gauge, params, 0.4, space, method="ordered")
    dense, _ = build_R(gauge, params, 0.4, space, method="eigh")
    assert_allclose(dense.entries[:8, :8], ordered.entries[:8, :8], atol=1e-9)


def test_bch_identities_on_random_draws():
    print("🔧 Testing BCH similarity relations...")
    rng = np.random.default_rng(2024)
    space = FockSpace(cutoff=64, boundary_margin=16)
    worst = 0.0
    for draw in range(20):
        params = ModelParams(
            Omega=rng.uniform(1.5, 3.0),
            G=rng.uniform(-0.3, 0.3),
            omega=rng.uniform(0.5, 1.5),
            branch=-1,
        )
        gauge = solve_auxiliary(params)
        t = rng.uniform(0.0, params.period)
        residuals = verify_bch(params, gauge, t, space, policy="auto")
        assert residuals.max() < 1e-8, f"draw {draw}: {residuals}"
        worst = max(worst, residuals.max())
    print(f"✅ 20 draws, max residual {worst:.2e}")


def test_injected_fault_breaks_derivative_identity():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=32, boundary_margin=8)
    residuals = verify_bch(params, gauge, 0.3, space, inject_fault=True)
    assert residuals.derivative > 1e-3
    assert max(residuals.splus, residuals.sminus, residuals.sz) < 1e-8


def test_finite_difference_derivative_matches_closed_form():
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=48, boundary_margin=16)
    numeric = derivative_term_numeric(gauge, params, 0.9, space, method="finite-difference")
    closed = derivative_term_closed(gauge, params, 0.9, space)
    assert (numeric - closed).interior_norm(16) < 1e-6


def test_pt_symmetry():
    print("🔧 Testing PT invariance...")
    params = acceptance()
    gauge = solve_auxiliary(params)
    space = FockSpace(cutoff=32, boundary_margin=8)
    for t in (0.0, 0.37, 2.1):
        assert pt_check(params, t, space) < 1e-14
        assert pt_check_operator(lambda time: build_R(gauge, params, time, space)[0], t) < 1e-12
        assert pt_check_operator(lambda time: derivative_term_closed(gauge, params, time, space), t) < 1e-14
    print("✅ H(t), R(t) and i R dR^-1/dt commute with PT")


def test_floquet_quasi_energies_match_kernel_spectrum():
    print("🔧 Testing isospectrality through Floquet quasi-energies...")
    params = acceptance()
    gauge = solve_auxiliary(params)
    for t in (0.0, params.period / 3.0):
        quasi = floquet_spectrum(params, gauge, 4, t=t)
        assert_allclose(quasi, spectrum(gauge, 4), atol=1e-6)
    rng = np.random.default_rng(5)
    for t in rng.uniform(0.0, params.period, size=3):
        quasi = floquet_spectrum(params, gauge, 33, t=t)
        assert_allclose(quasi, spectrum(gauge, 33), atol=1e-6)
    print("✅ quasi-energies equal (n + 1/2) Gamma for n <= 32")


def test_instantaneous_spectrum_is_time_independent():
    params = acceptance()
    space = FockSpace(cutoff=64, boundary_margin=8)
    expected = [math.sqrt(params.Omega**2 + 4.0 * params.G**2) * (n + 0.5) / 2.0 for n in range(3)]
    for t in (0.0, 1.1):
        assert_allclose(instantaneous_spectrum(params, t, 3, space), expected, atol=1e-6)


def test_hamiltonian_is_not_hermitian():
    params = acceptance()
    hamiltonian = build_hamiltonian(params, 0.5, FockSpace(cutoff=16))
    assert np.max(np.abs(hamiltonian.entries - hamiltonian.dagger().entries)) > 0.1


if __name__ == "__main__":
    test_auxiliary_solution_at_acceptance_parameters()
    test_decoupled_limit()
    test_degenerate_parameters()
    test_kernel_coefficients_both_branches()
    test_spectrum()
    test_kernel_reduction_is_diagonal()
    test_kernel_reduction_with_numeric_derivative()
    test_mirrored_branch_is_not_certifiable()
    test_certify_space_doubles_cutoff()
    test_fixed_cutoff_that_misses_the_tail_is_rejected()
    test_cutoff_limit_names_the_needed_size()
    test_transformation_column_matches_matrix()
    test_R_is_hermitian_and_inverts_on_low_block()
    test_ordered_and_eigh_exponentials_agree()
    test_bch_identities_on_random_draws()
    test_injected_fault_breaks_derivative_identity()
    test_finite_difference_derivative_matches_closed_form()
    test_pt_symmetry()
    test_floquet_quasi_energies_match_kernel_spectrum()
    test_instantaneous_spectrum_is_time_independent()
    test_hamiltonian_is_not_hermitian()
    print("\n🎉 Gauge engine tests completed!")
