import warnings
import numpy as np
from typing import Callable, Dict, Optional, Union

from core.grid import Grid, Operator
from core.hamiltonian import conjugation_closure
from core.klein import AntilinearMap, as_map, table_superoperators
from core.errors import DomainError, PreconditionError, UnsupportedError
from core.types import (
    Basis,
    BiorthogonalSystem,
    MappingReport,
    Relation,
    SymmetryCode,
    SymmetryEntry,
    SymmetryReport,
)

DEFAULT_TOLERANCE = 1e-10


def _reverse(matrix: np.ndarray) -> np.ndarray:
    return matrix[::-1, ::-1]


# ⟨x|V|y⟩ column: the matrix each code requires V to equal
_POSITION_CONDITIONS: Dict[SymmetryCode, Callable[[np.ndarray], np.ndarray]] = {
    SymmetryCode.I: lambda V: V,
    SymmetryCode.II: lambda V: V.conj().T,
    SymmetryCode.III: lambda V: _reverse(V),
    SymmetryCode.IV: lambda V: _reverse(V.conj().T),
    SymmetryCode.V: lambda V: V.conj(),
    SymmetryCode.VI: lambda V: V.T,
    SymmetryCode.VII: lambda V: _reverse(V.conj()),
    SymmetryCode.VIII: lambda V: _reverse(V.T),
}

# ⟨p|V|p'⟩ column. Θ sends p to -p while ΠΘ keeps p.
_MOMENTUM_CONDITIONS: Dict[SymmetryCode, Callable[[np.ndarray], np.ndarray]] = {
    SymmetryCode.I: lambda V: V,
    SymmetryCode.II: lambda V: V.conj().T,
    SymmetryCode.III: lambda V: _reverse(V),
    SymmetryCode.IV: lambda V: _reverse(V.conj().T),
    SymmetryCode.V: lambda V: _reverse(V.conj()),
    SymmetryCode.VI: lambda V: _reverse(V.T),
    SymmetryCode.VII: lambda V: V.conj(),
    SymmetryCode.VIII: lambda V: V.T,
}


def needs_momentum_reversal(code: SymmetryCode) -> bool:
    """Codes whose momentum-basis form pairs p with -p."""
    return code.klein.has_parity != code.klein.conjugates


def _relative(difference: np.ndarray, reference: np.ndarray) -> float:
    scale = np.linalg.norm(reference)
    if scale == 0:
        return float(np.linalg.norm(difference))
    return float(np.linalg.norm(difference) / scale)


def matrix_condition_check(
    V: Operator, code: SymmetryCode, basis: Basis, grid: Grid
) -> float:
    """Relative Frobenius residual of the matrix-element identity of one
    code, e.g. ⟨x|V|y⟩ = ⟨-y|V|-x⟩* for IV in the Position basis.

    Momentum-basis identities that pair p with -p need odd n: for even n
    the Nyquist momentum has no partner.
    """

    code, basis = SymmetryCode(code), Basis(basis)
    if not grid.is_symmetric:
        raise DomainError("matrix-element conditions need a symmetric grid")
    if basis is Basis.MOMENTUM and grid.n % 2 == 0 and needs_momentum_reversal(code):
        raise UnsupportedError(
            f"code {code.value} in the Momentum basis needs odd n, got n={grid.n}"
        )
    matrix = V.in_basis(basis).matrix
    conditions = (
        _MOMENTUM_CONDITIONS if basis is Basis.MOMENTUM else _POSITION_CONDITIONS
    )
    if code is SymmetryCode.I:
        return 0.0
    return _relative(matrix - conditions[code](matrix), matrix)


def classify(
    H: Operator,
    grid: Grid,
    tol: float = DEFAULT_TOLERANCE,
    basis: Basis = Basis.POSITION,
) -> SymmetryReport:
    """Tests H against the eight relations ℒ_code(H) = H.

    In the Position basis the residuals come from the superoperators
    themselves; in the Momentum basis from the ⟨p|V|p'⟩ identities, which
    give the same report for odd n.
    """

    if not grid.is_symmetric:
        raise DomainError(
            f"classification needs a symmetric grid, got [{grid.x_min}, {grid.x_max}]"
        )
    if not np.all(np.isfinite(H.matrix)):
        raise DomainError("Hamiltonian has non-finite entries")
    basis = Basis(basis)

    entries: Dict[str, SymmetryEntry] = {}
    if basis is Basis.POSITION:
        position = H.to_position()
        for code, superop in table_superoperators(grid).items():
            residual = (
                0.0
                if code is SymmetryCode.I
                else _relative(superop(position).matrix - position.matrix, position.matrix)
            )
            entries[code.value] = SymmetryEntry(residual, residual < tol)
    else:
        for code in SymmetryCode:
            residual = matrix_condition_check(H, code, basis, grid)
            entries[code.value] = SymmetryEntry(residual, residual < tol)

    report = SymmetryReport(entries=entries, tolerance=tol, basis=basis)
    if not report.closed_under_composition:
        warnings.warn(
            f"held codes {[c.value for c in report.held]} are not closed under "
            f"composition; some residuals sit near the tolerance {tol:.1e}",
            RuntimeWarning,
        )
    return report


def relation_residual(
    H: Operator, A: Union[Operator, AntilinearMap], relation: Relation
) -> float:
    """‖AH - HA‖ (Commute) or ‖AH - H^dagger A‖ (Pseudo), relative to
    ‖A‖_2 ‖H‖_F. For antilinear A = L K the products become L conj(H) and
    H L."""
    A = as_map(A)
    relation = Relation(relation)
    L = A.matrix
    matrix = H.matrix
    left = L @ (matrix.conj() if A.conjugates else matrix)
    right = (matrix if relation is Relation.COMMUTE else matrix.conj().T) @ L
    scale = np.linalg.norm(L, 2) * np.linalg.norm(matrix)
    if scale == 0:
        return float(np.linalg.norm(left - right))
    return float(np.linalg.norm(left - right) / scale)


def eigen_mapping_check(
    H: Operator,
    system: BiorthogonalSystem,
    A: Union[Operator, AntilinearMap],
    relation: Relation,
    tol: Optional[float] = None,
) -> MappingReport:
    """Checks that A maps each right eigenvector φ_j onto a right
    eigenvector of H (Commute) or of H^dagger (Pseudo), with eigenvalue E_j
    for linear A and E_j* for antilinear A."""
    A = as_map(A)
    relation = Relation(relation)
    tol = DEFAULT_TOLERANCE if tol is None else tol

    residual = relation_residual(H, A, relation)
    if residual > tol:
        raise PreconditionError(
            f"relation {relation.value} does not hold: residual {residual:.3e} > {tol:.1e}"
        )

    matrix = H.matrix if relation is Relation.COMMUTE else H.matrix.conj().T
    mapped = A.apply(system.right_vectors)
    targets = system.eigenvalues.conj() if A.conjugates else system.eigenvalues
    scale = np.linalg.norm(H.matrix) or 1.0
    errors = np.linalg.norm(matrix @ mapped - mapped * targets, axis=0) / (
        scale * np.linalg.norm(mapped, axis=0)
    )

    return MappingReport(
        relation=relation,
        antilinear=A.conjugates,
        relation_residual=residual,
        residuals=[float(e) for e in errors],
        conjugation_distance=conjugation_closure(system.eigenvalues),
    )
