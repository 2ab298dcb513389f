import sys
import numpy as np
from tqdm import tqdm
from itertools import combinations
from functools import cached_property
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

from core.grid import Grid, Operator, parity_matrix
from core.errors import DomainError, InvalidArgumentError
from core.types import Basis, GroupReport, KleinName, SymmetryCode

GROUP_TOLERANCE = 1e-12
MINIMAL_GENERATORS = (SymmetryCode.II, SymmetryCode.III, SymmetryCode.V)


@dataclass(frozen=True, eq=False)
class AntilinearMap:
    """A map v -> L v (linear) or v -> L conj(v) (antilinear).

    The Klein elements and their products with unitaries have a unitary
    linear part; general linear operators are also accepted so that
    relation residuals can be computed for arbitrary A.

    :param linear_part: Operator
        The matrix L.
    :param conjugates: bool
        Whether complex conjugation (in the basis of L) acts first.
    """

    linear_part: Operator
    conjugates: bool = False

    @property
    def grid(self) -> Grid:
        return self.linear_part.grid

    @property
    def matrix(self) -> np.ndarray:
        return self.linear_part.matrix

    @property
    def is_antilinear(self) -> bool:
        return self.conjugates

    @cached_property
    def inverse_permutation(self) -> Optional[np.ndarray]:
        """Index map inv such that L^dagger B L = B[inv][:, inv] when L is a
        permutation matrix, None otherwise."""
        matrix = self.matrix
        if np.any(matrix.imag != 0):
            return None
        real = matrix.real
        if not np.all((real == 0) | (real == 1)):
            return None
        if not (np.all(real.sum(axis=0) == 1) and np.all(real.sum(axis=1) == 1)):
            return None
        # (L v)_i = v_{perm[i]}
        perm = np.argmax(real, axis=1)
        return np.argsort(perm)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """Acts on a vector or on the columns of a matrix."""
        vectors = np.asarray(vectors, dtype=complex)
        return self.matrix @ (vectors.conj() if self.conjugates else vectors)

    def compose(self, other: "AntilinearMap") -> "AntilinearMap":
        """Returns self ∘ other, i.e. other acts first."""
        inner = other.matrix.conj() if self.conjugates else other.matrix
        return AntilinearMap(
            Operator(self.matrix @ inner, self.grid, self.linear_part.basis),
            self.conjugates != other.conjugates,
        )

    def adjoint(self) -> "AntilinearMap":
        """Adjoint of a unitary or antiunitary map, which is its inverse:
        (L)^dagger = L^dagger and (L K)^dagger = L^T K."""
        matrix = self.matrix.T if self.conjugates else self.matrix.conj().T
        return AntilinearMap(
            Operator(matrix, self.grid, self.linear_part.basis), self.conjugates
        )

    def same_as(self, other: "AntilinearMap", atol: float = GROUP_TOLERANCE) -> bool:
        return self.conjugates == other.conjugates and np.allclose(
            self.matrix, other.matrix, rtol=0.0, atol=atol
        )


def as_map(A: Union[Operator, AntilinearMap]) -> AntilinearMap:
    if isinstance(A, AntilinearMap):
        return A
    return AntilinearMap(A, False)


def klein_element(name: KleinName, grid: Grid) -> AntilinearMap:
    """One of {1, Π, Θ, ΠΘ} in the Position basis. Spinless time reversal is
    complex conjugation of position amplitudes."""
    name = KleinName(name)
    if name.has_parity:
        linear_part = parity_matrix(grid)
    else:
        linear_part = Operator(np.eye(grid.n), grid)
    return AntilinearMap(linear_part, name.conjugates)


def _dagger(matrices: np.ndarray) -> np.ndarray:
    return np.swapaxes(matrices.conj(), -1, -2)


@dataclass(frozen=True, eq=False)
class Superoperator:
    """ℒ_A(B) = A^dagger B A, optionally followed by ℒ_dagger(B) = B^dagger.

    Without a sandwich the superoperator is the identity (dagger=False) or
    the plain adjoint (dagger=True). The result is always a linear operator,
    but the superoperator itself is antilinear when exactly one of the
    sandwich conjugation and the adjoint is present.
    """

    sandwich: Optional[AntilinearMap] = None
    dagger: bool = False

    @property
    def is_antilinear(self) -> bool:
        conjugates = self.sandwich is not None and self.sandwich.conjugates
        return conjugates != self.dagger

    def act(self, matrices: np.ndarray) -> np.ndarray:
        """Acts on a single matrix or on a stack of matrices (..., n, n)."""
        result = np.asarray(matrices, dtype=complex)
        if self.sandwich is not None:
            A = self.sandwich
            if A.conjugates:
                result = result.conj()
            inv = A.inverse_permutation
            if inv is not None:
                result = result[..., inv, :][..., :, inv]
            elif A.conjugates:
                # A^dagger B A = L^T conj(B) conj(L)
                result = A.matrix.T @ result @ A.matrix.conj()
            else:
                result = A.matrix.conj().T @ result @ A.matrix
        if self.dagger:
            result = _dagger(result)
        return result

    def compose(self, other: "Superoperator") -> "Superoperator":
        """Returns self ∘ other. Since ℒ_A1 ∘ ℒ_A2 = ℒ_{A2 A1} and ℒ_dagger
        commutes with every (anti)unitary sandwich, the sandwiches compose
        in reverse order and the adjoint flags add mod 2."""
        if self.sandwich is None:
            sandwich = other.sandwich
        elif other.sandwich is None:
            sandwich = self.sandwich
        else:
            sandwich = other.sandwich.compose(self.sandwich)
        return Superoperator(sandwich, self.dagger != other.dagger)

    def __call__(self, B: Operator) -> Operator:
        return superop_apply(self, B)


def superop_apply(L: Superoperator, B: Operator) -> Operator:
    if L.sandwich is not None:
        reference = L.sandwich.linear_part
        if B.grid != reference.grid or B.basis != reference.basis:
            raise InvalidArgumentError(
                f"superoperator defined in the {reference.basis.value} basis on "
                f"n={reference.n} cannot act on a {B.basis.value} operator on n={B.n}"
            )
    return Operator(L.act(B.matrix), B.grid, B.basis)


def hs_inner(F: Operator, G: Operator) -> complex:
    """Hilbert-Schmidt product Tr(F^dagger G)."""
    F_matrix = F.matrix if isinstance(F, Operator) else np.asarray(F)
    G_matrix = G.matrix if isinstance(G, Operator) else np.asarray(G)
    if F_matrix.shape != G_matrix.shape:
        raise InvalidArgumentError(
            f"dimension mismatch: {F_matrix.shape} vs {G_matrix.shape}"
        )
    return complex(np.vdot(F_matrix, G_matrix))


def superop_adjoint(L: Superoperator) -> Superoperator:
    """ℒ_A^dagger = ℒ_{A^dagger}, ℒ_dagger^dagger = ℒ_dagger and
    ℒ_{A,dagger}^dagger = ℒ_{A^dagger,dagger}."""
    sandwich = None if L.sandwich is None else L.sandwich.adjoint()
    return Superoperator(sandwich, L.dagger)


def table_superoperators(grid: Grid) -> Dict[SymmetryCode, Superoperator]:
    return {
        code: Superoperator(klein_element(code.klein, grid), code.dagger)
        for code in SymmetryCode
    }


def _identify(
    superop: Superoperator, table: Dict[SymmetryCode, Superoperator]
) -> Optional[SymmetryCode]:
    for code, candidate in table.items():
        if candidate.dagger == superop.dagger and candidate.sandwich.same_as(
            superop.sandwich
        ):
            return code
    return None


def _generated(
    generators: List[SymmetryCode],
    products: Dict[SymmetryCode, Dict[SymmetryCode, Optional[SymmetryCode]]],
    identity: Optional[SymmetryCode],
) -> set:
    span = set(generators)
    if identity is not None:
        span.add(identity)
    while True:
        new = {products[a][b] for a in span for b in span} - {None}
        if new <= span:
            return span
        span |= new


def verify_group(grid: Grid) -> GroupReport:
    """Composes all 64 ordered pairs of the eight superoperators and
    identifies each composite by its action on the canonical matrix basis
    {E_ab} together with {i E_ab}. The imaginary copies are needed: on real
    matrices alone a linear and an antilinear superoperator can agree.

    The basis is processed one row index a at a time, intersecting the set
    of matching elements for every ordered pair.
    """
    if not grid.is_symmetric:
        raise DomainError("group verification needs a symmetric grid")

    table = table_superoperators(grid)
    codes = list(table)
    n = grid.n

    candidates = {
        (a, b): set(codes) for a in codes for b in codes
    }
    identity_candidates = set(codes)

    for row in tqdm(range(n), desc="group", file=sys.stdout, disable=None):
        probes = np.zeros((2 * n, n, n), dtype=complex)
        probes[np.arange(n), row, np.arange(n)] = 1.0
        probes[n + np.arange(n), row, np.arange(n)] = 1j

        images = np.stack([table[code].act(probes) for code in codes])
        identity_candidates &= {
            code
            for code, image in zip(codes, images)
            if np.max(np.abs(image - probes)) <= GROUP_TOLERANCE
        }
        for i, a in enumerate(codes):
            for b_index, b in enumerate(codes):
                composite = table[a].act(images[b_index])
                distance = np.max(np.abs(images - composite), axis=(1, 2, 3))
                candidates[(a, b)] &= {
                    codes[k] for k in np.flatnonzero(distance <= GROUP_TOLERANCE)
                }

    products: Dict[SymmetryCode, Dict[SymmetryCode, Optional[SymmetryCode]]] = {
        a: {
            b: next(iter(candidates[(a, b)])) if len(candidates[(a, b)]) == 1 else None
            for b in codes
        }
        for a in codes
    }
    identity = (
        next(iter(identity_candidates)) if len(identity_candidates) == 1 else None
    )

    closure = all(products[a][b] is not None for a in codes for b in codes)
    commutative = all(products[a][b] == products[b][a] for a in codes for b in codes)
    identity_present = identity is not None
    self_inverse = identity_present and all(products[a][a] == identity for a in codes)
    distinct = identity_present and all(products[a][identity] == a for a in codes)

    generators = list(MINIMAL_GENERATORS)
    generated = _generated(generators, products, identity) == set(codes)
    minimal = all(
        _generated(list(pair), products, identity) != set(codes)
        for pair in combinations(generators, 2)
    )

    symbolic = all(
        _identify(table[a].compose(table[b]), table) == products[a][b] == a * b
        for a in codes
        for b in codes
    )

    return GroupReport(
        n=n,
        elements=[code.value for code in codes],
        table=[
            [None if products[a][b] is None else products[a][b].value for b in codes]
            for a in codes
        ],
        closure=closure,
        commutative=commutative,
        self_inverse=self_inverse,
        identity_present=identity_present,
        generators=[code.value for code in generators],
        generated_by_minimal_set=generated and minimal,
        isomorphic_to_z2_cubed=closure
        and commutative
        and self_inverse
        and distinct
        and len(codes) == 8,
        symbolic_composition_agrees=symbolic,
    )


def _check_density(rho: Operator, label: str) -> None:
    matrix = rho.matrix
    scale = max(1.0, np.linalg.norm(matrix))
    if np.linalg.norm(matrix - matrix.conj().T) > GROUP_TOLERANCE * scale:
        raise InvalidArgumentError(f"{label} is not Hermitian")
    if abs(np.trace(matrix) - 1) > 1e-10:
        raise InvalidArgumentError(f"{label} does not have unit trace")
    if np.linalg.eigvalsh(matrix).min() < -1e-10:
        raise InvalidArgumentError(f"{label} is not positive semidefinite")


def wigner_check(L: Superoperator, rho1: Operator, rho2: Operator) -> float:
    """Returns |⟨⟨ℒρ1, ℒρ2⟩⟩ - ⟨⟨ρ1, ρ2⟩⟩| for two density operators."""
    _check_density(rho1, "rho1")
    _check_density(rho2, "rho2")
    overlap = hs_inner(rho1, rho2)
    if abs(overlap.imag) > GROUP_TOLERANCE:
        raise DomainError(
            f"overlap of density operators has imaginary part {overlap.imag:.3e}"
        )
    return abs(hs_inner(L(rho1), L(rho2)) - overlap)


def random_density_matrix(grid: Grid, rng: np.random.Generator) -> Operator:
    """Full-rank density operator G G^dagger / Tr(G G^dagger) from a complex
    Ginibre matrix G."""
    G = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal(
        (grid.n, grid.n)
    )
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return Operator(rho / np.trace(rho).real, grid, Basis.POSITION)
