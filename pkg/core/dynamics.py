import sys
import numpy as np
import scipy.linalg
from tqdm import tqdm
from typing import Dict, Optional, Tuple, Union

from core.grid import Operator
from core.klein import AntilinearMap, as_map
from core.hamiltonian import biorthogonal_eig, is_hermitian
from core.symmetry import DEFAULT_TOLERANCE, relation_residual
from core.errors import (
    DomainError,
    InvalidArgumentError,
    NearExceptionalPointError,
    NumericalRefusalError,
    PreconditionError,
    RangeError,
)
from core.types import (
    AuditReport,
    BiorthogonalSystem,
    ExpectationRecord,
    RateReport,
    Relation,
    Trajectory,
)

PROPAGATOR_METHODS = ("pade", "spectral", "cross_check")
SPECTRAL_CONDITION_LIMIT = 1e6
CROSS_CHECK_TOLERANCE = 1e-9
NORMALIZATION_TOLERANCE = 1e-12
RESCALE_ABOVE = 1e150
RESCALE_BELOW = 1e-150
# largest growth factor e^300 allowed per suggested sub-interval
GROWTH_PER_STEP = 300.0


def _growth_rate(matrix: np.ndarray, t: float, hbar: float) -> float:
    """Numerical abscissa of -iHt/(ħ|t|): ‖exp(-iHt/ħ)‖ <= exp(rate |t|)."""
    generator = -1j * matrix * np.sign(t) / hbar
    return float(np.linalg.eigvalsh((generator + generator.conj().T) / 2).max())


def _checked(U: np.ndarray, matrix: np.ndarray, t: float, hbar: float) -> np.ndarray:
    if np.all(np.isfinite(U)):
        return U
    rate = max(_growth_rate(matrix, t, hbar), 0.0)
    pieces = max(2, int(np.ceil(rate * abs(t) / GROWTH_PER_STEP)))
    raise RangeError(
        f"exp(-iHt/ħ) overflows at t={t:g} (growth rate {rate:.3e}); "
        f"split the interval into at least {pieces} steps and renormalize between them"
    )


def propagator_from_system(
    system: BiorthogonalSystem, t: float, hbar: float = 1.0
) -> np.ndarray:
    """U(t) = Σ_j |φ_j⟩ exp(-iE_j t/ħ) ⟨φ̂_j|."""
    phases = np.exp(-1j * system.eigenvalues * t / hbar)
    return (system.right_vectors * phases) @ system.left_vectors.conj().T


def propagator(
    H: Operator,
    t: float,
    method: str = "pade",
    system: Optional[BiorthogonalSystem] = None,
) -> Operator:
    """U(t) = exp(-iHt/ħ).

    :param H: Operator
        The generator.
    :param t: float
        Time, finite.
    :param method: str
        "pade" (scaling and squaring), "spectral" (biorthogonal
        resolution, needs eigenvector condition below 1e6) or
        "cross_check" (both, required to agree within 1e-9).
    :param system: Optional[BiorthogonalSystem]
        Precomputed eigensystem of H for the spectral route.
    :return: Operator
        The propagator in the basis of H.
    """

    if method not in PROPAGATOR_METHODS:
        raise InvalidArgumentError(
            f"unknown propagator method {method!r}, available: {PROPAGATOR_METHODS}"
        )
    if not np.isfinite(t):
        raise InvalidArgumentError(f"time must be finite, got {t}")

    hbar = H.grid.hbar
    matrix = H.matrix
    if not np.all(np.isfinite(matrix)):
        raise DomainError("Hamiltonian has non-finite entries")
    result = None

    if method in ("pade", "cross_check"):
        with np.errstate(over="ignore", invalid="ignore"):
            result = _checked(scipy.linalg.expm(-1j * matrix * t / hbar), matrix, t, hbar)

    if method in ("spectral", "cross_check"):
        system = system if system is not None else biorthogonal_eig(H)
        if system.eigvec_condition >= SPECTRAL_CONDITION_LIMIT:
            raise NearExceptionalPointError(
                f"spectral propagator needs eigenvector condition below "
                f"{SPECTRAL_CONDITION_LIMIT:.0e}, got {system.eigvec_condition:.3e}"
            )
        with np.errstate(over="ignore", invalid="ignore"):
            spectral = _checked(propagator_from_system(system, t, hbar), matrix, t, hbar)
        if result is not None:
            difference = np.linalg.norm(result - spectral) / max(
                1.0, np.linalg.norm(result)
            )
            if difference > CROSS_CHECK_TOLERANCE:
                raise NumericalRefusalError(
                    f"Padé and spectral propagators differ by {difference:.3e} at t={t:g}"
                )
        else:
            result = spectral

    return Operator(result, H.grid, H.basis)


def dual_propagator(
    H: Operator,
    t: float,
    method: str = "pade",
    system: Optional[BiorthogonalSystem] = None,
) -> Operator:
    """Û(t) = exp(-iH^dagger t/ħ). A supplied system must belong to
    H^dagger."""
    return propagator(H.dagger(), t, method=method, system=system)


def generalized_unitarity_residual(H: Operator, t: float) -> float:
    """max(‖U Û^dagger - 1‖_F, ‖Û^dagger U - 1‖_F)."""
    U = propagator(H, t).matrix
    dual_adjoint = dual_propagator(H, t).matrix.conj().T
    identity = np.eye(H.n)
    return float(
        max(
            np.linalg.norm(U @ dual_adjoint - identity),
            np.linalg.norm(dual_adjoint @ U - identity),
        )
    )


def validate_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidArgumentError("times must be a non-empty 1-D sequence")
    if times[0] != 0:
        raise InvalidArgumentError(f"times must start at 0, got {times[0]}")
    if np.any(np.diff(times) < 0):
        raise InvalidArgumentError("times must be sorted")
    if not np.all(np.isfinite(times)):
        raise InvalidArgumentError("times must be finite")
    return times


def validate_state(psi0, n: int) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (n,):
        raise InvalidArgumentError(f"state has shape {psi0.shape}, expected ({n},)")
    norm = np.vdot(psi0, psi0).real
    if not np.isfinite(norm) or abs(norm - 1) > NORMALIZATION_TOLERANCE:
        raise InvalidArgumentError(f"initial state must be normalized, ‖ψ0‖² = {norm!r}")
    return psi0


def _propagate(
    H: Operator, psi0: np.ndarray, times: np.ndarray, method: str, desc: str
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact-exponential stepping between sample times. Returns the stored
    (possibly rescaled) states and their log scale factors."""
    cache: Dict[float, np.ndarray] = {}
    states = np.empty((len(times), len(psi0)), dtype=complex)
    log_scales = np.zeros(len(times))
    states[0] = psi0
    state, log_scale = psi0, 0.0

    for k in tqdm(range(1, len(times)), desc=desc, file=sys.stdout, disable=None):
        step = float(times[k] - times[k - 1])
        # reuse only for bit-identical intervals
        if step not in cache:
            cache[step] = propagator(H, step, method=method).matrix
        state = cache[step] @ state
        squared = np.vdot(state, state).real
        if not np.isfinite(squared):
            raise RangeError(
                f"state overflowed between t={times[k - 1]:g} and t={times[k]:g}; "
                f"sample more densely"
            )
        if squared > RESCALE_ABOVE or 0 < squared < RESCALE_BELOW:
            state = state / np.sqrt(squared)
            log_scale += 0.5 * np.log(squared)
        states[k] = state
        log_scales[k] = log_scale
    return states, log_scales


def evolve(
    H: Operator,
    psi0: np.ndarray,
    times,
    with_dual: bool = False,
    method: str = "pade",
) -> Trajectory:
    """Samples ψ(t) = U(t)ψ0 and optionally ψ̂(t) = Û(t)ψ0 at the given
    times.

    :param H: Operator
        Time-independent Hamiltonian.
    :param psi0: np.ndarray
        Normalized initial state.
    :param times: sequence of float
        Sorted sample times starting at 0.
    :param with_dual: bool
        Whether to also evolve under H^dagger.
    :param method: str
        Propagator method, see `propagator`.
    :return: Trajectory
        States stay finite: amplified states are rescaled and their log
        scale is tracked.
    """

    times = validate_times(times)
    psi0 = validate_state(psi0, H.n)

    states, log_scales = _propagate(H, psi0, times, method, "evolve")
    squared = np.einsum("ki,ki->k", states.conj(), states).real
    with np.errstate(over="ignore"):
        norms = np.exp(2 * log_scales) * squared

    dual_states, dual_log_scales = None, None
    if with_dual:
        dual_states, dual_log_scales = _propagate(
            H.dagger(), psi0, times, method, "evolve dual"
        )

    return Trajectory(
        times=times,
        states=states,
        norms=norms,
        log_scales=log_scales,
        dual_states=dual_states,
        dual_log_scales=dual_log_scales,
    )


def _matrix_of(A: Union[Operator, np.ndarray]) -> np.ndarray:
    return A.matrix if isinstance(A, Operator) else np.asarray(A, dtype=complex)


def expectation(A: Union[Operator, np.ndarray], psi: np.ndarray) -> complex:
    """⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩."""
    psi = np.asarray(psi, dtype=complex)
    squared = np.vdot(psi, psi).real
    if squared == 0:
        raise DomainError("expectation value of the zero vector")
    return complex(np.vdot(psi, _matrix_of(A) @ psi) / squared)


def antilinear_expectation(
    A: AntilinearMap, psi: np.ndarray, psi0: np.ndarray
) -> Tuple[float, float]:
    """Returns (modulus, phase) of ⟨ψ|Aψ⟩/⟨ψ|ψ⟩ for antilinear A.

    Only the modulus is gauge invariant. The phase is reported in the gauge
    where the component of ψ at the first nonzero index of the initial
    state ψ0 is real and positive.

    :param psi: np.ndarray
        The state ψ(t).
    :param psi0: np.ndarray
        The initial state of the trajectory ψ(t) belongs to; fixes the gauge.
    """
    psi = np.asarray(psi, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    nonzero = np.flatnonzero(np.abs(psi0) > 1e-12 * np.linalg.norm(psi0))
    if nonzero.size == 0:
        raise DomainError("gauge reference state is zero")
    if not np.any(psi):
        raise DomainError("expectation value of the zero vector")
    c = psi[nonzero[0]]
    if c == 0:
        c = psi[np.flatnonzero(psi)[0]]
    gauged = psi * (np.conj(c) / abs(c))
    value = np.vdot(gauged, A.apply(gauged)) / np.vdot(gauged, gauged).real
    return float(abs(value)), float(np.angle(value))


def _pairings(
    matrix: np.ndarray,
    left: np.ndarray,
    left_scales: np.ndarray,
    right: np.ndarray,
    right_scales: np.ndarray,
    conjugates: bool = False,
) -> np.ndarray:
    """⟨l_k|A r_k⟩ for every sample, undoing the stored rescaling. Scale
    factors are real, so they pass through an antilinear A unchanged."""
    acted = (right.conj() if conjugates else right) @ matrix.T
    raw = np.einsum("ki,ki->k", left.conj(), acted)
    with np.errstate(over="ignore", invalid="ignore"):
        return raw * np.exp(left_scales + right_scales)


def dual_pairing(traj: Trajectory, A: Union[Operator, np.ndarray]) -> np.ndarray:
    """⟨ψ̂(t)|A|ψ(t)⟩ along a trajectory with dual states."""
    if not traj.has_dual:
        raise PreconditionError("trajectory has no dual states")
    return _pairings(
        _matrix_of(A), traj.dual_states, traj.dual_log_scales, traj.states, traj.log_scales
    )


def expectation_record(
    traj: Trajectory,
    A: Union[Operator, np.ndarray],
    name: str,
    relation: Relation = Relation.PSEUDO,
) -> ExpectationRecord:
    """Normalized ⟨A⟩(t) together with the quantity the relation conserves:
    ⟨ψ̂|A|ψ⟩ for Commute (needs dual states), ⟨ψ|A|ψ⟩ = ⟨A⟩(t) N(t) for
    Pseudo."""
    matrix = _matrix_of(A)
    squared = np.einsum("ki,ki->k", traj.states.conj(), traj.states).real
    raw = np.einsum("ki,ki->k", traj.states.conj(), traj.states @ matrix.T)
    values = raw / squared
    if Relation(relation) is Relation.COMMUTE:
        conserved = dual_pairing(traj, matrix)
    else:
        conserved = _pairings(
            matrix, traj.states, traj.log_scales, traj.states, traj.log_scales
        )
    return ExpectationRecord(
        observable=name, times=traj.times, values=values, conserved_quantity=conserved
    )


def norm_bound(A: Union[Operator, np.ndarray]) -> float:
    """max |a_i| over the spectrum of a Hermitian observable."""
    matrix = _matrix_of(A)
    if not is_hermitian(matrix):
        raise PreconditionError("norm bound needs a Hermitian observable")
    return float(np.max(np.abs(np.linalg.eigvalsh((matrix + matrix.conj().T) / 2))))


def rate_audit(
    H: Operator,
    A: Union[Operator, np.ndarray],
    psi: np.ndarray,
    dt: Optional[float] = None,
) -> RateReport:
    """Compares Richardson-extrapolated central differences of N(t) and
    ⟨A⟩(t) at t=0 with

        dN/dt = ⟨ψ|H - H^dagger|ψ⟩ / (iħ)
        d⟨A⟩/dt = (⟨AH - H^dagger A⟩ / N - ⟨A⟩_ψ ⟨H - H^dagger⟩ / N²) / (iħ)

    where ⟨·⟩ are unnormalized. When AH = H^dagger A the first term
    vanishes and the single-term form is checked as well.
    """
    hbar = H.grid.hbar
    matrix = H.matrix
    A_matrix = _matrix_of(A)
    psi = np.asarray(psi, dtype=complex)
    if dt is None:
        dt = 1e-3 * hbar / (np.linalg.norm(matrix) or 1.0)
    if dt <= 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")

    def sample(s: float) -> Tuple[float, complex]:
        state = propagator(H, s).matrix @ psi
        squared = np.vdot(state, state).real
        return squared, np.vdot(state, A_matrix @ state) / squared

    def central(h: float) -> Tuple[float, complex]:
        (n_plus, a_plus), (n_minus, a_minus) = sample(h), sample(-h)
        return (n_plus - n_minus) / (2 * h), (a_plus - a_minus) / (2 * h)

    coarse, fine = central(dt), central(dt / 2)
    norm_fd = (4 * fine[0] - coarse[0]) / 3
    expectation_fd = (4 * fine[1] - coarse[1]) / 3

    squared = np.vdot(psi, psi).real
    non_hermitian = np.vdot(psi, (matrix - matrix.conj().T) @ psi)
    norm_analytic = (non_hermitian / (1j * hbar)).real
    commuted = np.vdot(psi, (A_matrix @ matrix - matrix.conj().T @ A_matrix) @ psi)
    a_raw = np.vdot(psi, A_matrix @ psi)
    single_term = -a_raw * non_hermitian / squared**2 / (1j * hbar)
    expectation_analytic = commuted / squared / (1j * hbar) + single_term

    def relative(x, y) -> float:
        return float(abs(x - y) / max(1.0, abs(y)))

    pseudo = relation_residual(H, Operator(A_matrix, H.grid, H.basis), Relation.PSEUDO)
    pseudohermitian = pseudo < DEFAULT_TOLERANCE
    return RateReport(
        dt=float(dt),
        norm_rate_fd=float(norm_fd),
        norm_rate_analytic=float(norm_analytic),
        norm_rate_residual=relative(norm_fd, norm_analytic),
        expectation_rate_fd=complex(expectation_fd),
        expectation_rate_analytic=complex(expectation_analytic),
        expectation_rate_residual=relative(expectation_fd, expectation_analytic),
        pseudohermitian=pseudohermitian,
        symmetric_form_residual=(
            relative(expectation_fd, single_term) if pseudohermitian else None
        ),
    )


def _drift(series: np.ndarray) -> float:
    return float(np.max(np.abs(series - series[0]))) if len(series) else 0.0


def conservation_audit(
    H: Operator,
    A: Union[Operator, AntilinearMap],
    relation: Relation,
    traj: Trajectory,
    name: str = "A",
    tol: float = DEFAULT_TOLERANCE,
    drift_tolerance: float = 1e-8,
) -> AuditReport:
    """Audits the conservation law implied by AH = HA (⟨ψ̂|A|ψ⟩ constant) or
    by AH = H^dagger A (⟨ψ|A|ψ⟩ constant, hence ⟨A⟩(t) N(t) = ⟨A⟩(0) and,
    for Hermitian A, N(t) >= |⟨A⟩(0)| / max|a_i|).

    Antilinear A only gets the modulus drift reported; no pass/fail claim
    is made for it.
    """
    relation = Relation(relation)
    A = as_map(A)
    residual = relation_residual(H, A, relation)
    if residual > tol:
        raise PreconditionError(
            f"relation {relation.value} does not hold for {name}: "
            f"residual {residual:.3e} > {tol:.1e}"
        )
    if relation is Relation.COMMUTE and not traj.has_dual:
        raise PreconditionError("commutation audits need a trajectory with dual states")

    if A.conjugates:
        if relation is Relation.COMMUTE:
            series = _pairings(
                A.matrix,
                traj.dual_states,
                traj.dual_log_scales,
                traj.states,
                traj.log_scales,
                conjugates=True,
            )
        else:
            series = _pairings(
                A.matrix, traj.states, traj.log_scales, traj.states, traj.log_scales, True
            )
        moduli = np.abs(series)
        return AuditReport(
            relation=relation,
            observable=name,
            antilinear=True,
            relation_residual=residual,
            initial_value=complex(series[0]),
            drift=_drift(moduli),
            passed=None,
        )

    record = expectation_record(traj, A.linear_part, name, relation)
    series = record.conserved_quantity
    initial = complex(series[0])
    drift = _drift(series)
    passed = drift <= drift_tolerance * max(1.0, abs(initial))

    report = AuditReport(
        relation=relation,
        observable=name,
        antilinear=False,
        relation_residual=residual,
        initial_value=initial,
        drift=drift,
        passed=passed,
        record=record,
    )
    if relation is Relation.PSEUDO:
        initial_expectation = record.values[0]
        with np.errstate(over="ignore", invalid="ignore"):
            report.scaling_drift = float(
                np.max(np.abs(record.values * traj.norms - initial_expectation))
            )
            report.rescaled_expectation_residual = float(
                np.max(np.abs(record.values - initial_expectation / traj.norms))
            )
        if is_hermitian(A.matrix):
            bound = abs(initial_expectation) / norm_bound(A.linear_part)
            report.norm_bound = float(bound)
            report.min_bound_margin = float(np.min(traj.norms - bound))
            report.passed = passed and report.min_bound_margin >= -drift_tolerance
    return report
