import numpy as np
from enum import Enum
from dataclasses import dataclass, field
from typing import List, Dict, Optional, Tuple


class ExitCode(int, Enum):
    OK = 0
    CONFIG_ERROR = 2
    DOMAIN_ERROR = 3
    NUMERICAL_REFUSAL = 4


class Basis(str, Enum):
    POSITION = "Position"
    MOMENTUM = "Momentum"


class KleinName(str, Enum):
    ONE = "One"
    PARITY = "Parity"
    TIME_REVERSAL = "TimeReversal"
    PARITY_TIME_REVERSAL = "ParityTimeReversal"

    @property
    def has_parity(self) -> bool:
        return self in (KleinName.PARITY, KleinName.PARITY_TIME_REVERSAL)

    @property
    def conjugates(self) -> bool:
        return self in (KleinName.TIME_REVERSAL, KleinName.PARITY_TIME_REVERSAL)

    @classmethod
    def from_flags(cls, parity: bool, conjugates: bool) -> "KleinName":
        for name in cls:
            if name.has_parity == parity and name.conjugates == conjugates:
                return name
        raise AssertionError("unreachable")


class Relation(str, Enum):
    COMMUTE = "Commute"
    PSEUDO = "Pseudo"


class Variant(str, Enum):
    PLAIN = "Plain"
    PRIMED = "Primed"


class SymmetryCode(str, Enum):
    """Roman codes of the eight Hamiltonian symmetries built from the
    Klein group {1, Π, Θ, ΠΘ} and the adjoint. Odd codes are commutation
    relations AH = HA, even codes are pseudohermiticity relations
    AH = H†A."""

    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"
    VII = "VII"
    VIII = "VIII"

    @property
    def klein(self) -> KleinName:
        return _CODE_TO_KLEIN[self][0]

    @property
    def dagger(self) -> bool:
        return _CODE_TO_KLEIN[self][1]

    @property
    def relation(self) -> Relation:
        return Relation.PSEUDO if self.dagger else Relation.COMMUTE

    @property
    def bits(self) -> Tuple[bool, bool, bool]:
        """(dagger, parity, conjugation) coordinates in (Z2)^3."""
        return (self.dagger, self.klein.has_parity, self.klein.conjugates)

    @property
    def is_antilinear(self) -> bool:
        return self.klein.conjugates != self.dagger

    @classmethod
    def from_bits(cls, dagger: bool, parity: bool, conjugates: bool) -> "SymmetryCode":
        klein = KleinName.from_flags(parity, conjugates)
        for code, (name, flag) in _CODE_TO_KLEIN.items():
            if name == klein and flag == dagger:
                return code
        raise AssertionError("unreachable")

    def __mul__(self, other: "SymmetryCode") -> "SymmetryCode":
        return SymmetryCode.from_bits(
            *(a != b for a, b in zip(self.bits, other.bits))
        )


_CODE_TO_KLEIN: Dict[SymmetryCode, Tuple[KleinName, bool]] = {
    SymmetryCode.I: (KleinName.ONE, False),
    SymmetryCode.II: (KleinName.ONE, True),
    SymmetryCode.III: (KleinName.PARITY, False),
    SymmetryCode.IV: (KleinName.PARITY, True),
    SymmetryCode.V: (KleinName.TIME_REVERSAL, False),
    SymmetryCode.VI: (KleinName.TIME_REVERSAL, True),
    SymmetryCode.VII: (KleinName.PARITY_TIME_REVERSAL, False),
    SymmetryCode.VIII: (KleinName.PARITY_TIME_REVERSAL, True),
}


@dataclass
class GroupReport:
    """Outcome of the order-eight group verification."""

    n: int
    elements: List[str]
    table: List[List[Optional[str]]]
    closure: bool
    commutative: bool
    self_inverse: bool
    identity_present: bool
    generators: List[str]
    generated_by_minimal_set: bool
    isomorphic_to_z2_cubed: bool
    symbolic_composition_agrees: bool

    @property
    def passed(self) -> bool:
        return all(
            (
                self.closure,
                self.commutative,
                self.self_inverse,
                self.identity_present,
                self.generated_by_minimal_set,
                self.isomorphic_to_z2_cubed,
                self.symbolic_composition_agrees,
            )
        )


@dataclass
class SymmetryEntry:
    residual: float
    holds: bool


@dataclass
class SymmetryReport:
    entries: Dict[str, SymmetryEntry]
    tolerance: float
    basis: Basis

    @property
    def held(self) -> List[SymmetryCode]:
        return [SymmetryCode(code) for code, e in self.entries.items() if e.holds]

    def holds(self, code: SymmetryCode) -> bool:
        return self.entries[code.value].holds

    @property
    def closed_under_composition(self) -> bool:
        held = set(self.held)
        return all(a * b in held for a in held for b in held)

    @property
    def predicts_conjugate_spectrum(self) -> bool:
        """Linear pseudohermiticity (II, IV) makes H similar to H†, and an
        antilinear commutant (V, VII) maps E to E*; either closes the
        spectrum under conjugation. These are the codes whose superoperator
        is antilinear. VI and VIII only tie H to H^T and predict nothing."""
        return any(code.is_antilinear for code in self.held)


@dataclass
class BiorthogonalSystem:
    """Right eigenvectors of H (unit norm) and right eigenvectors of H†
    normalized so that ⟨φ̂_j|φ_k⟩ = δ_jk."""

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    eigvec_condition: float
    method: str = "paired"
    cross_validation_residual: Optional[float] = None

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        return (self.right_vectors * self.eigenvalues) @ self.left_vectors.conj().T

    def biorthonormality_residual(self) -> float:
        overlap = self.left_vectors.conj().T @ self.right_vectors
        return float(np.linalg.norm(overlap - np.eye(len(self))))

    def right_residual(self, matrix: np.ndarray) -> float:
        scale = np.linalg.norm(matrix) or 1.0
        residual = matrix @ self.right_vectors - self.right_vectors * self.eigenvalues
        return float(
            np.max(
                np.linalg.norm(residual, axis=0)
                / (scale * np.linalg.norm(self.right_vectors, axis=0))
            )
        )

    def left_residual(self, matrix: np.ndarray) -> float:
        scale = np.linalg.norm(matrix) or 1.0
        residual = (
            matrix.conj().T @ self.left_vectors
            - self.left_vectors * self.eigenvalues.conj()
        )
        return float(
            np.max(
                np.linalg.norm(residual, axis=0)
                / (scale * np.linalg.norm(self.left_vectors, axis=0))
            )
        )


@dataclass
class MappingReport:
    relation: Relation
    antilinear: bool
    relation_residual: float
    residuals: List[float]
    conjugation_distance: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


@dataclass
class Trajectory:
    """Samples of ψ(t) (and optionally ψ̂(t)).

    Stored vectors may be rescaled to stay finite: the physical state is
    exp(log_scales[k]) * states[k], so norms[k] = exp(2 log_scales[k]) *
    ||states[k]||^2, which reduces to the plain squared norm whenever no
    rescaling happened.
    """

    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    log_scales: np.ndarray
    dual_states: Optional[np.ndarray] = None
    dual_log_scales: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def has_dual(self) -> bool:
        return self.dual_states is not None

    @property
    def log_norms(self) -> np.ndarray:
        squared = np.einsum("ki,ki->k", self.states.conj(), self.states).real
        return 2.0 * self.log_scales + np.log(squared)


@dataclass
class ExpectationRecord:
    observable: str
    times: np.ndarray
    values: np.ndarray
    conserved_quantity: np.ndarray


@dataclass
class RateReport:
    dt: float
    norm_rate_fd: float
    norm_rate_analytic: float
    norm_rate_residual: float
    expectation_rate_fd: complex
    expectation_rate_analytic: complex
    expectation_rate_residual: float
    pseudohermitian: bool = False
    symmetric_form_residual: Optional[float] = None


@dataclass
class AuditReport:
    """Conservation audit of one observable along one trajectory.

    ``passed`` is None when no claim is made (antilinear observables)."""

    relation: Relation
    observable: str
    antilinear: bool
    relation_residual: float
    initial_value: complex
    drift: float
    passed: Optional[bool]
    scaling_drift: Optional[float] = None
    rescaled_expectation_residual: Optional[float] = None
    norm_bound: Optional[float] = None
    min_bound_margin: Optional[float] = None
    record: Optional[ExpectationRecord] = field(default=None, repr=False)


@dataclass
class InvariantTrack:
    times: np.ndarray
    operators: np.ndarray
    variant: Variant
    step: float


@dataclass
class PairingResult:
    name: str
    applicable: bool
    initial_value: complex
    drift: float
    values: np.ndarray = field(repr=False, default=None)


@dataclass
class InvariantAuditReport:
    variant: Variant
    step: float
    hermitian_schedule: bool
    pairings: List[PairingResult] = field(default_factory=list)

    def pairing(self, name: str) -> PairingResult:
        for result in self.pairings:
            if result.name == name:
                return result
        raise KeyError(name)


@dataclass
class ConditionReport:
    """Instantaneous commutation versus the invariance condition for an
    operator path A(t)."""

    max_commutator_residual: float
    max_condition_residual: float
