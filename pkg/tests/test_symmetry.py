import numpy as np
import pytest

from core.errors import DomainError, PreconditionError, UnsupportedError
from core.grid import Grid, Operator, kinetic_operator, make_grid
from core.hamiltonian import biorthogonal_eig, build_potential, conjugation_closure
from core.klein import klein_element, table_superoperators
from core.potential import PotentialSpec
from core.symmetry import (
    classify,
    eigen_mapping_check,
    matrix_condition_check,
    relation_residual,
)
from core.types import (
    Basis,
    KleinName,
    Relation,
    SymmetryCode,
    SymmetryEntry,
    SymmetryReport,
)

C = SymmetryCode
MAPPING_GRIDS = pytest.mark.parametrize("n, x_max, gamma", [(15, 2.0, 0.1), (63, 10.0, 0.05)])


def _held(report: SymmetryReport):
    return {code.value for code in report.held}


def test_kinetic_operator_has_every_symmetry(grid63):
    report = classify(kinetic_operator(grid63), grid63)
    assert _held(report) == {code.value for code in SymmetryCode}
    assert max(e.residual for e in report.entries.values()) < 1e-12


def test_real_even_well_has_every_symmetry(grid63, hamiltonian):
    H = hamiltonian(grid63, "RealGaussianWell", depth=1.0, width=1.0)
    report = classify(H, grid63)
    assert _held(report) == {code.value for code in SymmetryCode}
    assert max(e.residual for e in report.entries.values()) < 1e-12
    assert report.closed_under_composition


@pytest.mark.parametrize("basis", list(Basis))
def test_imaginary_linear_codes(basis, grid63, hamiltonian):
    H = hamiltonian(grid63, "ImaginaryLinear", gamma=1.0)
    report = classify(H, grid63, basis=basis)
    assert _held(report) == {"I", "IV", "VII"}
    assert report.closed_under_composition
    assert report.predicts_conjugate_spectrum


@pytest.mark.parametrize("basis", list(Basis))
def test_complex_absorbing_codes(basis, grid63, hamiltonian):
    H = hamiltonian(grid63, "ComplexAbsorbing", gamma0=1.0, width=1.0)
    report = classify(H, grid63, basis=basis)
    assert _held(report) == {"I", "III", "VI", "VIII"}
    assert not report.predicts_conjugate_spectrum


def test_absorbing_spectrum_is_not_conjugation_closed(hamiltonian):
    grid = make_grid(15, 3.0)
    H = hamiltonian(grid, "ComplexAbsorbing", gamma0=1.0, width=1.0)
    eigenvalues = biorthogonal_eig(H).eigenvalues
    assert np.all(eigenvalues.imag < 0)
    assert conjugation_closure(eigenvalues) > 1e-3


def test_separable_kernel_same_report_in_both_bases(grid63, hamiltonian):
    H = hamiltonian(grid63, "NonlocalSeparable", u_center=1.0, w_center=-1.0)
    position = classify(H, grid63, basis=Basis.POSITION)
    momentum = classify(H, grid63, basis=Basis.MOMENTUM)
    assert _held(position) == _held(momentum) == {"I", "IV", "V", "VIII"}


def test_matrix_conditions_match_superoperators(rng):
    grid = make_grid(5, 1.0)
    matrix = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    V = Operator(matrix, grid)
    table = table_superoperators(grid)
    for code in SymmetryCode:
        if code is C.I:
            continue
        expected = np.linalg.norm(table[code](V).matrix - matrix) / np.linalg.norm(matrix)
        for basis in Basis:
            assert matrix_condition_check(V, code, basis, grid) == pytest.approx(
                expected, rel=1e-10
            )


def test_symmetrized_matrix_satisfies_its_condition(rng):
    grid = make_grid(7, 2.0)
    matrix = rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7))
    table = table_superoperators(grid)
    for code in SymmetryCode:
        V = Operator(matrix, grid)
        symmetric = Operator((matrix + table[code](V).matrix) / 2, grid)
        for basis in Basis:
            assert matrix_condition_check(symmetric, code, basis, grid) < 1e-12


def test_imaginary_linear_is_real_in_momentum(grid63):
    V = build_potential(PotentialSpec("ImaginaryLinear", {"gamma": 1.0}), grid63)
    assert matrix_condition_check(V, C.VII, Basis.MOMENTUM, grid63) < 1e-12


def test_hermitian_potential_condition_is_exact(grid63):
    V = build_potential(PotentialSpec("RealGaussianWell"), grid63)
    assert matrix_condition_check(V, C.II, Basis.POSITION, grid63) == 0.0


def test_even_grid_momentum_reversal_is_unsupported():
    grid = make_grid(8, 2.0)
    V = Operator(np.eye(8), grid)
    for code in (C.III, C.IV, C.V, C.VI):
        with pytest.raises(UnsupportedError):
            matrix_condition_check(V, code, Basis.MOMENTUM, grid)
    for code in (C.I, C.II, C.VII, C.VIII):
        assert matrix_condition_check(V, code, Basis.MOMENTUM, grid) < 1e-12


def test_even_grid_classifies_in_position(hamiltonian):
    grid = make_grid(8, 2.0)
    report = classify(hamiltonian(grid, "ImaginaryLinear"), grid)
    assert _held(report) == {"I", "IV", "VII"}


def test_asymmetric_grid_is_rejected():
    grid = Grid(n=5, x_min=0.0, x_max=2.0)
    H = Operator(np.eye(5), grid)
    with pytest.raises(DomainError):
        classify(H, grid)
    with pytest.raises(DomainError):
        matrix_condition_check(H, C.III, Basis.POSITION, grid)


def test_closure_of_held_codes():
    entries = {code.value: SymmetryEntry(1.0, False) for code in SymmetryCode}
    for code in (C.I, C.IV, C.V):
        entries[code.value] = SymmetryEntry(0.0, True)
    report = SymmetryReport(entries, 1e-10, Basis.POSITION)
    assert not report.closed_under_composition

    entries[C.VIII.value] = SymmetryEntry(0.0, True)
    assert report.closed_under_composition
    assert report.predicts_conjugate_spectrum


def test_conjugate_spectrum_follows_from_symmetry(hamiltonian):
    grid = make_grid(15, 2.0)
    H = hamiltonian(grid, "ImaginaryLinear", gamma=0.1)
    report = classify(H, grid)
    assert report.predicts_conjugate_spectrum
    assert conjugation_closure(biorthogonal_eig(H).eigenvalues) < 1e-8


def test_relation_residual_for_antilinear_maps(grid63, hamiltonian):
    H = hamiltonian(grid63, "RealGaussianWell")
    theta = klein_element(KleinName.TIME_REVERSAL, grid63)
    assert relation_residual(H, theta, Relation.COMMUTE) < 1e-12
    assert relation_residual(H, theta, Relation.PSEUDO) < 1e-12


def test_relation_residual_detects_broken_parity(grid63, hamiltonian):
    H = hamiltonian(grid63, "ImaginaryLinear")
    parity = klein_element(KleinName.PARITY, grid63).linear_part
    assert relation_residual(H, parity, Relation.COMMUTE) > 1e-3
    assert relation_residual(H, parity, Relation.PSEUDO) < 1e-12


def test_parity_maps_hermitian_eigenvectors(hamiltonian):
    grid = make_grid(31, 5.0)
    H = hamiltonian(grid, "RealGaussianWell")
    system = biorthogonal_eig(H)
    parity = klein_element(KleinName.PARITY, grid)
    report = eigen_mapping_check(H, system, parity, Relation.COMMUTE)
    assert not report.antilinear
    assert report.max_residual < 1e-8


@MAPPING_GRIDS
def test_pseudo_parity_maps_onto_adjoint_eigenvectors(hamiltonian, n, x_max, gamma):
    grid = make_grid(n, x_max)
    H = hamiltonian(grid, "ImaginaryLinear", gamma=gamma)
    system = biorthogonal_eig(H)
    parity = klein_element(KleinName.PARITY, grid)
    report = eigen_mapping_check(H, system, parity, Relation.PSEUDO)
    assert report.max_residual < 1e-7


@MAPPING_GRIDS
def test_pt_maps_eigenvectors_with_conjugated_eigenvalues(hamiltonian, n, x_max, gamma):
    grid = make_grid(n, x_max)
    H = hamiltonian(grid, "ImaginaryLinear", gamma=gamma)
    system = biorthogonal_eig(H)
    pt = klein_element(KleinName.PARITY_TIME_REVERSAL, grid)
    report = eigen_mapping_check(H, system, pt, Relation.COMMUTE)
    assert report.antilinear
    assert report.max_residual < 1e-7
    assert report.conjugation_distance < 1e-8


def test_mapping_needs_the_relation(hamiltonian):
    grid = make_grid(15, 2.0)
    H = hamiltonian(grid, "ImaginaryLinear", gamma=0.1)
    system = biorthogonal_eig(H)
    parity = klein_element(KleinName.PARITY, grid)
    with pytest.raises(PreconditionError):
        eigen_mapping_check(H, system, parity, Relation.COMMUTE)
