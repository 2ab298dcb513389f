import warnings
import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from core.grid import Grid, Operator, kinetic_operator
from core.potential import PotentialSpec, resolve_potential
from core.types import BiorthogonalSystem
from core.errors import (
    DegeneracyError,
    DomainError,
    InvalidArgumentError,
    NearExceptionalPointError,
)

HERMITIAN_TOLERANCE = 1e-12
CLUSTER_TOLERANCE = 1e-8
FALLBACK_RESIDUAL = 1e-6


def build_potential(spec: PotentialSpec, grid: Grid) -> Operator:
    return resolve_potential(spec).build(grid)


def build_hamiltonian(grid: Grid, spec: PotentialSpec) -> Operator:
    """H = H0 + V in the Position basis. Model-space kinds (TwoLevelPT)
    provide the whole Hamiltonian and get no kinetic term."""
    potential = resolve_potential(spec)
    V = potential.build(grid)
    if potential.model_space:
        return V
    return kinetic_operator(grid) + V


def is_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_TOLERANCE) -> bool:
    scale = np.linalg.norm(matrix)
    return np.linalg.norm(matrix - matrix.conj().T) <= tol * max(scale, 1e-300)


def _sorted_eig(matrix: np.ndarray):
    eigenvalues, vectors = scipy.linalg.eig(matrix)
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    eigenvalues, vectors = eigenvalues[order], vectors[:, order]
    return eigenvalues, vectors / np.linalg.norm(vectors, axis=0)


def _pair_left_vectors(
    matrix: np.ndarray, eigenvalues: np.ndarray, right: np.ndarray, tol: float
) -> np.ndarray:
    """Left vectors from an independent eigendecomposition of H^dagger,
    matched by E_j* and normalized so ⟨φ̂_j|φ_j⟩ = 1."""
    scale = np.linalg.norm(matrix)
    cluster = CLUSTER_TOLERANCE * scale
    dual_values, dual_vectors = scipy.linalg.eig(matrix.conj().T)

    for j, E in enumerate(eigenvalues):
        neighbours = np.flatnonzero(np.abs(eigenvalues - E) <= cluster)
        if len(neighbours) > 1:
            raise DegeneracyError(
                f"eigenvalues {E:.6g} and {eigenvalues[neighbours[neighbours != j][0]]:.6g} "
                f"lie within the cluster tolerance {cluster:.3e}"
            )

    left = np.empty_like(right)
    used = np.zeros(len(dual_values), dtype=bool)
    for j, E in enumerate(eigenvalues):
        distance = np.abs(dual_values - np.conj(E))
        distance[used] = np.inf
        nearest = int(np.argmin(distance))
        if np.count_nonzero(distance <= cluster) > 1:
            raise DegeneracyError(
                f"ambiguous partner for E={E:.6g}: "
                f"{np.count_nonzero(distance <= cluster)} H^dagger eigenvalues "
                f"within {cluster:.3e}"
            )
        if not np.isfinite(distance[nearest]) or distance[nearest] > np.sqrt(tol) * scale:
            raise DegeneracyError(f"no H^dagger eigenvalue pairs with conj(E)={np.conj(E):.6g}")
        used[nearest] = True

        phi_hat = dual_vectors[:, nearest]
        overlap = np.vdot(phi_hat, right[:, j])
        if abs(overlap) < tol:
            raise DegeneracyError(
                f"left and right vectors for E={E:.6g} are nearly orthogonal "
                f"(overlap {abs(overlap):.3e})"
            )
        left[:, j] = phi_hat / np.conj(overlap)
    return left


def biorthogonal_eig(H: Operator, tol: float = 1e-8) -> BiorthogonalSystem:
    """Biorthogonal eigensystem of a diagonalizable H.

    Right vectors have unit norm. Left vectors are right eigenvectors of
    H^dagger with eigenvalue E_j*, scaled so that ⟨φ̂_j|φ_k⟩ = δ_jk.

    :param H: Operator
        The Hamiltonian.
    :param tol: float
        Conditioning tolerance: a right-vector matrix with condition number
        above 1/tol is treated as non-diagonalizable.
    :return: BiorthogonalSystem
        Eigenvalues sorted by real part, then imaginary part.
    """

    if tol <= 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    matrix = H.matrix
    if not np.all(np.isfinite(matrix)):
        raise DomainError("Hamiltonian has non-finite entries")

    if is_hermitian(matrix):
        eigenvalues, vectors = scipy.linalg.eigh((matrix + matrix.conj().T) / 2)
        return BiorthogonalSystem(
            eigenvalues=eigenvalues.astype(complex),
            right_vectors=vectors,
            left_vectors=vectors.copy(),
            eigvec_condition=1.0,
            method="hermitian",
        )

    eigenvalues, right = _sorted_eig(matrix)
    condition = float(np.linalg.cond(right))
    if not np.isfinite(condition) or condition > 1 / tol:
        raise NearExceptionalPointError(
            f"eigenvector condition number {condition:.3e} exceeds {1 / tol:.1e}: "
            f"H is too close to an exceptional point to be diagonalized"
        )

    inverse_left = np.linalg.inv(right).conj().T
    try:
        left = _pair_left_vectors(matrix, eigenvalues, right, tol)
    except DegeneracyError as e:
        system = BiorthogonalSystem(
            eigenvalues=eigenvalues,
            right_vectors=right,
            left_vectors=inverse_left,
            eigvec_condition=condition,
            method="inverse",
        )
        residual = system.left_residual(matrix)
        if residual > FALLBACK_RESIDUAL:
            raise DegeneracyError(
                f"{e}; inverse fallback leaves left residual {residual:.3e}"
            ) from e
        return system

    cross_validation = float(
        np.linalg.norm(left - inverse_left) / np.linalg.norm(inverse_left)
    )
    if cross_validation > np.sqrt(tol):
        warnings.warn(
            f"left vectors from H^dagger and from inv(R)^dagger differ by "
            f"{cross_validation:.3e}",
            RuntimeWarning,
        )
    return BiorthogonalSystem(
        eigenvalues=eigenvalues,
        right_vectors=right,
        left_vectors=left,
        eigvec_condition=condition,
        method="paired",
        cross_validation_residual=cross_validation,
    )


def resolution_residual(system: BiorthogonalSystem, H: Operator) -> float:
    """‖Σ_j |φ_j⟩ E_j ⟨φ̂_j| - H‖_F / ‖H‖_F."""
    scale = H.norm() or 1.0
    return float(np.linalg.norm(system.reconstruct() - H.matrix) / scale)


def spectral_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest distance between two eigenvalue multisets under the optimal
    one-to-one matching."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"multisets of sizes {a.size} and {b.size}")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def conjugation_closure(eigenvalues: np.ndarray) -> float:
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    return spectral_distance(eigenvalues, eigenvalues.conj())
