import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.errors import (
    DomainError,
    InvalidArgumentError,
    PreconditionError,
    RangeError,
)
from core.grid import Operator, gaussian_state, make_grid, model_grid, position_operator
from core.hamiltonian import biorthogonal_eig
from core.klein import klein_element
from core.dynamics import (
    antilinear_expectation,
    conservation_audit,
    dual_pairing,
    dual_propagator,
    evolve,
    expectation,
    expectation_record,
    generalized_unitarity_residual,
    norm_bound,
    propagator,
    propagator_from_system,
    rate_audit,
)
from core.types import KleinName, Relation


def _scaled_random(random_operator, n=32):
    return random_operator(make_grid(n, 1.0), scale=0.5)


def test_propagator_at_zero_is_identity(random_operator):
    H = _scaled_random(random_operator, 8)
    assert_allclose(propagator(H, 0.0).matrix, np.eye(8), atol=1e-15)


def test_hermitian_propagator_is_unitary(grid63, hamiltonian):
    U = propagator(hamiltonian(grid63, "RealGaussianWell"), 1.0).matrix
    assert np.linalg.norm(U @ U.conj().T - np.eye(63)) < 1e-10


def test_two_level_closed_form():
    gamma, kappa, t = 2.0, 1.0, 1.0
    H = Operator([[1j * gamma, kappa], [kappa, -1j * gamma]], model_grid())
    omega = np.sqrt(complex(kappa**2 - gamma**2))
    expected = np.cos(omega * t) * np.eye(2) - 1j * np.sin(omega * t) / omega * H.matrix
    U = propagator(H, t).matrix
    assert np.linalg.norm(U - expected) < 1e-10 * np.linalg.norm(expected)


@pytest.mark.parametrize("method", ["spectral", "cross_check"])
def test_propagator_methods_agree(method):
    H = Operator([[0.5j, 1.0], [1.0, -0.5j]], model_grid())
    reference = propagator(H, 0.7).matrix
    assert_allclose(propagator(H, 0.7, method=method).matrix, reference, atol=1e-10)


def test_propagator_from_system(random_operator):
    H = _scaled_random(random_operator, 12)
    system = biorthogonal_eig(H)
    assert_allclose(
        propagator_from_system(system, 0.3), propagator(H, 0.3).matrix, atol=1e-10
    )


def test_unknown_method_and_time(random_operator):
    H = _scaled_random(random_operator, 4)
    with pytest.raises(InvalidArgumentError):
        propagator(H, 1.0, method="taylor")
    with pytest.raises(InvalidArgumentError):
        propagator(H, np.inf)


def test_composition_law(random_operator):
    H = _scaled_random(random_operator, 16)
    U = propagator(H, 0.8).matrix
    assert_allclose(U, propagator(H, 0.3).matrix @ propagator(H, 0.5).matrix, atol=1e-10)


def test_dual_propagator_is_inverse_adjoint(random_operator):
    H = _scaled_random(random_operator, 8)
    dual = dual_propagator(H, 0.6).matrix
    assert_allclose(dual, propagator(H, -0.6).matrix.conj().T, atol=1e-10)


def test_dual_propagator_of_hermitian_is_propagator(grid63, hamiltonian):
    H = hamiltonian(grid63, "RealGaussianWell")
    assert_allclose(dual_propagator(H, 0.5).matrix, propagator(H, 0.5).matrix, atol=1e-10)


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_generalized_unitarity(t, random_operator):
    assert generalized_unitarity_residual(_scaled_random(random_operator), t) < 1e-9


def test_generalized_unitarity_at_zero(random_operator):
    assert generalized_unitarity_residual(_scaled_random(random_operator, 4), 0.0) < 1e-15


def test_hermitian_evolution_keeps_the_norm(grid63, hamiltonian):
    H = hamiltonian(grid63, "RealGaussianWell")
    psi0 = gaussian_state(grid63, center=1.0)
    traj = evolve(H, psi0, np.linspace(0, 5, 51))
    assert np.max(np.abs(traj.norms - 1)) < 1e-10


def test_absorbing_evolution_loses_norm(grid63, hamiltonian):
    H = hamiltonian(grid63, "ComplexAbsorbing")
    traj = evolve(H, gaussian_state(grid63), np.linspace(0, 2, 21))
    assert np.all(np.diff(traj.norms) <= 1e-14)
    assert traj.norms[-1] < 0.9


def test_dual_state_grows_under_absorption(grid63, hamiltonian):
    H = hamiltonian(grid63, "ComplexAbsorbing")
    psi = dual_propagator(H, 0.5).matrix @ gaussian_state(grid63)
    assert np.vdot(psi, psi).real > 1.0


def test_dual_overlap_is_conserved(random_operator):
    H = _scaled_random(random_operator)
    psi0 = gaussian_state(H.grid, width=0.3)
    traj = evolve(H, psi0, np.linspace(0, 3, 31), with_dual=True)
    overlap = dual_pairing(traj, np.eye(32))
    assert np.max(np.abs(overlap - 1)) < 1e-9


def test_invalid_initial_data(random_operator):
    H = _scaled_random(random_operator, 4)
    psi = np.array([1.0, 0, 0, 0])
    with pytest.raises(InvalidArgumentError):
        evolve(H, 2 * psi, [0.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        evolve(H, psi, [0.0, 2.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        evolve(H, psi, [0.5, 1.0])
    with pytest.raises(InvalidArgumentError):
        evolve(H, psi[:3], [0.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        evolve(H, np.full(4, np.nan), [0.0, 1.0])


def test_non_finite_hamiltonian_is_a_domain_error():
    H = Operator(np.array([[np.nan, 0.0], [0.0, 1.0]]), model_grid())
    for method in ("pade", "spectral", "cross_check"):
        with pytest.raises(DomainError):
            propagator(H, 1.0, method=method)
    with pytest.raises(DomainError):
        evolve(H, np.array([1.0, 0.0]), [0.0, 1.0])


def test_irregular_samples_use_the_exact_intervals():
    energies = np.array([1000.0, -1000.0])
    H = Operator(np.diag(energies), model_grid())
    psi0 = np.array([1.0, 1.0]) / np.sqrt(2)
    times = np.array([0.0, 0.1 + 3e-13, 0.2 + 3e-13, 0.3])
    traj = evolve(H, psi0, times)
    for t, state in zip(times, traj.states):
        assert_allclose(state, np.exp(-1j * energies * t) * psi0, rtol=0, atol=1e-11)


def test_amplified_states_are_rescaled():
    H = Operator(np.diag([500j, 0.0]), model_grid())
    psi0 = np.array([1.0, 1.0]) / np.sqrt(2)
    traj = evolve(H, psi0, [0.0, 0.5, 1.0, 1.5, 2.0])
    assert np.all(np.isfinite(traj.states))
    assert traj.log_scales[-1] > 0
    assert traj.log_norms[-1] == pytest.approx(np.log(0.5) + 2000.0, rel=1e-12)


def test_overflowing_propagator_is_refused():
    H = Operator(np.diag([1000j, 0.0]), model_grid())
    with pytest.raises(RangeError, match="at least"):
        propagator(H, 10.0)


def test_parity_expectation_values(grid63):
    parity = klein_element(KleinName.PARITY, grid63).linear_part
    even = gaussian_state(grid63)
    odd = grid63.points * even
    odd = odd / np.linalg.norm(odd)
    assert expectation(parity, even) == pytest.approx(1.0)
    assert expectation(parity, odd) == pytest.approx(-1.0)
    assert expectation(parity, (even + odd) / np.sqrt(2)) == pytest.approx(0.0, abs=1e-12)
    assert expectation(np.eye(63), 3 * even) == pytest.approx(1.0)


def test_expectation_of_zero_vector(grid5):
    with pytest.raises(DomainError):
        expectation(np.eye(5), np.zeros(5))


def test_antilinear_expectation_is_gauge_invariant(grid63):
    theta = klein_element(KleinName.TIME_REVERSAL, grid63)
    psi = gaussian_state(grid63, center=0.5)
    modulus, phase = antilinear_expectation(theta, psi, psi)
    assert modulus == pytest.approx(1.0)
    assert phase == pytest.approx(0.0, abs=1e-12)

    moving = gaussian_state(grid63, center=0.5, momentum=1.0)
    reference = antilinear_expectation(theta, moving, moving)
    for alpha in (0.3, 1.7, -2.5):
        gauged = antilinear_expectation(theta, np.exp(1j * alpha) * moving, moving)
        assert gauged == pytest.approx(reference, abs=1e-12)


def test_antilinear_phase_gauge_follows_initial_state(grid5):
    theta = klein_element(KleinName.TIME_REVERSAL, grid5)
    psi = np.array([1.0, 1j, 0.5 - 0.5j, 2.0, -1.0]) / np.sqrt(7.5)
    psi0 = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
    modulus, phase = antilinear_expectation(theta, psi, psi0)
    # gauge makes psi[2] real-positive
    expected = np.exp(2j * np.angle(psi[2])) * np.sum(np.conj(psi) ** 2)
    assert modulus == pytest.approx(abs(expected))
    assert phase == pytest.approx(np.angle(expected))
    assert phase != pytest.approx(antilinear_expectation(theta, psi, psi)[1])
    with pytest.raises(DomainError):
        antilinear_expectation(theta, psi, np.zeros(5))


def test_norm_bound_needs_hermitian_observable(grid5):
    assert norm_bound(position_operator(grid5)) == pytest.approx(2.0)
    with pytest.raises(PreconditionError):
        norm_bound(np.triu(np.ones((5, 5))))


def test_rates_for_hermitian_hamiltonian(grid63, hamiltonian):
    H = hamiltonian(grid63, "RealGaussianWell")
    rates = rate_audit(H, position_operator(grid63), gaussian_state(grid63, center=1.0))
    assert abs(rates.norm_rate_fd) < 1e-8
    assert abs(rates.norm_rate_analytic) < 1e-10
    assert rates.expectation_rate_residual < 1e-6
    assert rates.dt == pytest.approx(1e-3 / H.norm())


def test_rates_for_absorbing_potential(grid63, hamiltonian):
    H = hamiltonian(grid63, "ComplexAbsorbing")
    parity = klein_element(KleinName.PARITY, grid63).linear_part
    rates = rate_audit(H, parity, gaussian_state(grid63, center=0.5), dt=1e-3)
    assert rates.norm_rate_analytic < 0
    assert rates.norm_rate_residual < 1e-6
    assert rates.expectation_rate_residual < 1e-6
    assert not rates.pseudohermitian


def test_rates_for_pseudohermitian_pair(grid63, hamiltonian):
    H = hamiltonian(grid63, "ImaginaryLinear")
    parity = klein_element(KleinName.PARITY, grid63).linear_part
    rates = rate_audit(H, parity, gaussian_state(grid63, center=2.0), dt=1e-3)
    assert rates.pseudohermitian
    assert rates.norm_rate_residual < 1e-6
    assert rates.symmetric_form_residual < 1e-6


def test_commuting_observable_is_conserved(random_operator):
    H = _scaled_random(random_operator)
    A = H @ H
    traj = evolve(H, gaussian_state(H.grid, width=0.3), np.linspace(0, 1, 11), with_dual=True)
    report = conservation_audit(H, A, Relation.COMMUTE, traj, name="H^2")
    assert report.passed
    assert report.drift < 1e-8 * max(1.0, abs(report.initial_value))


def test_parity_scaling_law(grid63, hamiltonian):
    H = hamiltonian(grid63, "ImaginaryLinear", gamma=1.0)
    parity = klein_element(KleinName.PARITY, grid63).linear_part
    psi0 = gaussian_state(grid63, center=2.0)
    traj = evolve(H, psi0, np.linspace(0, 2, 41))
    report = conservation_audit(H, parity, Relation.PSEUDO, traj, name="Parity")
    assert report.scaling_drift < 1e-6
    assert report.rescaled_expectation_residual < 1e-6
    assert report.min_bound_margin >= -1e-8
    assert report.norm_bound == pytest.approx(abs(expectation(parity, psi0)))


def test_hermitian_energy_under_both_relations(grid63, hamiltonian):
    H = hamiltonian(grid63, "RealGaussianWell")
    traj = evolve(H, gaussian_state(grid63, center=1.0), np.linspace(0, 2, 21), with_dual=True)
    for relation in Relation:
        report = conservation_audit(H, H, relation, traj, name="H")
        assert report.drift < 1e-10 * max(1.0, abs(report.initial_value))


def test_record_conserved_quantity_matches_scaling(grid63, hamiltonian):
    H = hamiltonian(grid63, "ImaginaryLinear", gamma=0.5)
    parity = klein_element(KleinName.PARITY, grid63).linear_part
    traj = evolve(H, gaussian_state(grid63, center=1.0), np.linspace(0, 1, 11))
    record = expectation_record(traj, parity, "Parity")
    assert_allclose(record.conserved_quantity, record.values * traj.norms, rtol=1e-12, atol=1e-12)


def test_audit_preconditions(grid63, hamiltonian):
    H = hamiltonian(grid63, "ImaginaryLinear")
    parity = klein_element(KleinName.PARITY, grid63).linear_part
    psi0 = gaussian_state(grid63, center=1.0)
    traj = evolve(H, psi0, np.linspace(0, 1, 5))
    with pytest.raises(PreconditionError):
        conservation_audit(H, parity, Relation.COMMUTE, traj)

    hermitian = hamiltonian(grid63, "RealGaussianWell")
    plain = evolve(hermitian, psi0, np.linspace(0, 1, 5))
    with pytest.raises(PreconditionError):
        conservation_audit(hermitian, parity, Relation.COMMUTE, plain)


def test_antilinear_audit_makes_no_claim(grid63, hamiltonian):
    H = hamiltonian(grid63, "ImaginaryLinear")
    pt = klein_element(KleinName.PARITY_TIME_REVERSAL, grid63)
    traj = evolve(H, gaussian_state(grid63, center=1.0), np.linspace(0, 1, 11), with_dual=True)
    report = conservation_audit(H, pt, Relation.COMMUTE, traj, name="PT")
    assert report.antilinear
    assert report.passed is None
    assert report.drift >= 0
