import sys
import numpy as np
from tqdm import tqdm
from dataclasses import dataclass
from typing import Callable, Optional

from core.grid import Grid, Operator, kinetic_operator, model_grid, parity_matrix
from core.potential import PotentialSpec
from core.hamiltonian import build_potential, is_hermitian
from core.dynamics import validate_state, validate_times, propagator, dual_propagator
from core.errors import InvalidArgumentError
from core.types import (
    ConditionReport,
    InvariantAuditReport,
    InvariantTrack,
    PairingResult,
    Trajectory,
    Variant,
)

DEFAULT_STEP_FRACTION = 1e-3

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
UPPER = np.array([[1, 0], [0, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class HamiltonianSchedule:
    """H(t) evaluated on demand.

    :param evaluator: Callable[[float], np.ndarray]
        Returns the n×n Position-basis matrix of H(t).
    :param grid: Grid
        Grid (or model space) the matrices live on.
    :param name: str
        Label used in reports.
    """

    evaluator: Callable[[float], np.ndarray]
    grid: Grid
    name: str = "schedule"

    @property
    def hbar(self) -> float:
        return self.grid.hbar

    def matrix(self, t: float) -> np.ndarray:
        matrix = np.asarray(self.evaluator(t), dtype=complex)
        if matrix.shape != (self.grid.n, self.grid.n):
            raise InvalidArgumentError(
                f"schedule {self.name} returned shape {matrix.shape} at t={t:g}, "
                f"expected ({self.grid.n}, {self.grid.n})"
            )
        return matrix

    def __call__(self, t: float) -> Operator:
        return Operator(self.matrix(t), self.grid)

    def is_hermitian_on(self, times: np.ndarray) -> bool:
        return all(is_hermitian(self.matrix(t)) for t in times)


def constant_schedule(H: Operator) -> HamiltonianSchedule:
    return HamiltonianSchedule(lambda t: H.matrix, H.grid, "constant")


def driven_two_level(
    delta: float = 1.0,
    omega0: float = 1.0,
    frequency: float = 1.0,
    loss: float = 0.0,
    hbar: float = 1.0,
) -> HamiltonianSchedule:
    """Rabi drive H(t) = (Δ/2)σz + (Ω0 sin(ωt)/2)σx - iγ|0⟩⟨0|."""
    grid = model_grid(hbar=hbar)

    def evaluator(t: float) -> np.ndarray:
        return (
            0.5 * delta * SIGMA_Z
            + 0.5 * omega0 * np.sin(frequency * t) * SIGMA_X
            - 1j * loss * UPPER
        )

    return HamiltonianSchedule(evaluator, grid, "driven_two_level")


def rotating_two_level(
    delta: float = 1.0, frequency: float = 1.0, hbar: float = 1.0
) -> HamiltonianSchedule:
    """H(t) = (Δ/2)(cos ωt σz + sin ωt σx). A(t) = H(t) commutes with H(t)
    at every instant but does not solve the invariance condition."""
    grid = model_grid(hbar=hbar)

    def evaluator(t: float) -> np.ndarray:
        return 0.5 * delta * (np.cos(frequency * t) * SIGMA_Z + np.sin(frequency * t) * SIGMA_X)

    return HamiltonianSchedule(evaluator, grid, "rotating_two_level")


def modulated_potential(
    grid: Grid, spec: PotentialSpec, amplitude: float = 0.5, frequency: float = 1.0
) -> HamiltonianSchedule:
    """H(t) = H0 + (1 + a sin ωt) V."""
    kinetic = kinetic_operator(grid).matrix
    potential = build_potential(spec, grid).matrix

    def evaluator(t: float) -> np.ndarray:
        return kinetic + (1 + amplitude * np.sin(frequency * t)) * potential

    return HamiltonianSchedule(evaluator, grid, f"modulated_{spec.kind}")


def initial_invariant(
    schedule: HamiltonianSchedule, kind: str, perturbation: float = 0.1
) -> Operator:
    """I0 = H(0), the identity, or 1 + εΠ."""
    if kind == "Hamiltonian":
        return schedule(0.0)
    identity = np.eye(schedule.grid.n, dtype=complex)
    if kind == "Identity":
        return Operator(identity, schedule.grid)
    if kind == "IdentityPerturbation":
        return Operator(
            identity + perturbation * parity_matrix(schedule.grid).matrix, schedule.grid
        )
    raise InvalidArgumentError(f"unknown initial invariant {kind!r}")


def _substeps(interval: float, step: float) -> int:
    if interval == 0:
        return 0
    return max(1, int(np.ceil(interval / step - 1e-9)))


def _rk4(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    times: np.ndarray,
    step: float,
    desc: str,
) -> np.ndarray:
    """Classical fixed-step RK4, sampled at `times`. Each interval between
    samples is split into equal substeps no longer than `step`."""
    samples = np.empty((len(times),) + y0.shape, dtype=complex)
    samples[0] = y0
    y = y0
    for k in tqdm(range(1, len(times)), desc=desc, file=sys.stdout, disable=None):
        t0, interval = times[k - 1], times[k] - times[k - 1]
        m = _substeps(interval, step)
        for i in range(m):
            h = interval / m
            t = t0 + i * h
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + h / 2 * k1)
            k3 = rhs(t + h / 2, y + h / 2 * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        samples[k] = y
    return samples


def _default_step(times: np.ndarray, step: Optional[float]) -> float:
    if step is None:
        window = times[-1] - times[0]
        step = DEFAULT_STEP_FRACTION * window if window > 0 else 1.0
    if step <= 0:
        raise InvalidArgumentError(f"integration step must be positive, got {step}")
    return float(step)


def evolve_td(
    schedule: HamiltonianSchedule,
    psi0: np.ndarray,
    times,
    use_dagger: bool = False,
    step: Optional[float] = None,
) -> Trajectory:
    """iħ ∂ψ/∂t = H(t)ψ, or H(t)^dagger ψ when use_dagger is set."""
    times = validate_times(times)
    psi0 = validate_state(psi0, schedule.grid.n)
    step = _default_step(times, step)
    factor = -1j / schedule.hbar

    def rhs(t: float, psi: np.ndarray) -> np.ndarray:
        matrix = schedule.matrix(t)
        return factor * ((matrix.conj().T if use_dagger else matrix) @ psi)

    states = _rk4(rhs, psi0, times, step, "evolve_td dual" if use_dagger else "evolve_td")
    return Trajectory(
        times=times,
        states=states,
        norms=np.einsum("ki,ki->k", states.conj(), states).real,
        log_scales=np.zeros(len(times)),
    )


def integrate_invariant(
    schedule: HamiltonianSchedule,
    I0: Operator,
    times,
    variant: Variant = Variant.PLAIN,
    step: Optional[float] = None,
) -> InvariantTrack:
    """Integrates ∂I/∂t = (1/iħ)[H, I] (Plain) or
    ∂I'/∂t = (1/iħ)(H^dagger I' - I' H) (Primed) from I(times[0]) = I0."""
    variant = Variant(variant)
    times = validate_times(times)
    step = _default_step(times, step)
    initial = np.asarray(I0.matrix if isinstance(I0, Operator) else I0, dtype=complex)
    if initial.shape != (schedule.grid.n, schedule.grid.n):
        raise InvalidArgumentError(
            f"initial invariant has shape {initial.shape}, expected "
            f"({schedule.grid.n}, {schedule.grid.n})"
        )
    factor = -1j / schedule.hbar

    def rhs(t: float, I: np.ndarray) -> np.ndarray:
        matrix = schedule.matrix(t)
        left = matrix if variant is Variant.PLAIN else matrix.conj().T
        return factor * (left @ I - I @ matrix)

    operators = _rk4(rhs, initial, times, step, f"invariant {variant.value}")
    operators[0] = initial
    return InvariantTrack(times=times, operators=operators, variant=variant, step=step)


def invariant_closed_form(
    H: Operator, I0: Operator, t: float, variant: Variant = Variant.PLAIN
) -> np.ndarray:
    """Exact solution for time-independent H: e^{-iHt/ħ} I0 e^{iHt/ħ}
    (Plain) or e^{-iH^dagger t/ħ} I0 e^{iHt/ħ} (Primed)."""
    left = (
        propagator(H, t) if Variant(variant) is Variant.PLAIN else dual_propagator(H, t)
    )
    return left.matrix @ I0.matrix @ propagator(H, -t).matrix


def _pairing_series(left: np.ndarray, operators: np.ndarray, right: np.ndarray):
    return np.einsum("ki,kij,kj->k", left.conj(), operators, right)


def _result(name: str, applicable: bool, values: np.ndarray) -> PairingResult:
    return PairingResult(
        name=name,
        applicable=applicable,
        initial_value=complex(values[0]),
        drift=float(np.max(np.abs(values - values[0]))),
        values=values,
    )


def invariant_audit(
    schedule: HamiltonianSchedule, track: InvariantTrack, psi0: np.ndarray
) -> InvariantAuditReport:
    """Evolves ψ (and ψ̂ under H^dagger) with the track's step and reports
    the drift of every pairing. Plain tracks are conserved in the dual
    pairing ⟨ψ̂|I|ψ⟩; the ordinary pairing ⟨ψ|I|ψ⟩ is conserved only for
    Hermitian H(t) and is flagged not applicable otherwise. Primed tracks
    are conserved in the ordinary pairing."""
    hermitian = schedule.is_hermitian_on(track.times)
    forward = evolve_td(schedule, psi0, track.times, step=track.step)
    ordinary = _pairing_series(forward.states, track.operators, forward.states)

    report = InvariantAuditReport(
        variant=track.variant, step=track.step, hermitian_schedule=hermitian
    )
    if track.variant is Variant.PLAIN:
        dual = evolve_td(schedule, psi0, track.times, use_dagger=True, step=track.step)
        report.pairings.append(
            _result("dual", True, _pairing_series(dual.states, track.operators, forward.states))
        )
        report.pairings.append(_result("ordinary", hermitian, ordinary))
    else:
        report.pairings.append(_result("ordinary", True, ordinary))
    return report


def convergence_ratio(drift_h: float, drift_half: float) -> float:
    """drift(h) / drift(h/2), about 16 for a fourth-order integrator above
    the rounding floor."""
    if drift_half == 0:
        return float("inf")
    return float(drift_h / drift_half)


def condition_residual(
    schedule: HamiltonianSchedule,
    operator_fn: Callable[[float], np.ndarray],
    times,
    delta: Optional[float] = None,
) -> ConditionReport:
    """For an operator path A(t), the largest relative instantaneous
    commutator ‖[A, H]‖ and the largest relative residual of the
    invariance condition ∂A/∂t - (1/iħ)[H, A], with ∂A/∂t by central
    differences."""
    times = np.asarray(times, dtype=float)
    if delta is None:
        window = times[-1] - times[0]
        delta = 1e-5 * window if window > 0 else 1e-5
    commutator_max, condition_max = 0.0, 0.0
    for t in times:
        H = schedule.matrix(t)
        A = np.asarray(operator_fn(t), dtype=complex)
        derivative = (
            np.asarray(operator_fn(t + delta)) - np.asarray(operator_fn(t - delta))
        ) / (2 * delta)
        commutator = H @ A - A @ H
        scale = np.linalg.norm(H) * np.linalg.norm(A) or 1.0
        commutator_max = max(commutator_max, np.linalg.norm(commutator) / scale)
        condition = derivative + 1j / schedule.hbar * commutator
        condition_max = max(
            condition_max, np.linalg.norm(condition) * schedule.hbar / scale
        )
    return ConditionReport(
        max_commutator_residual=float(commutator_max),
        max_condition_residual=float(condition_max),
    )


def pairing_drift(
    schedule: HamiltonianSchedule,
    operator_fn: Callable[[float], np.ndarray],
    psi0: np.ndarray,
    times,
    step: Optional[float] = None,
) -> float:
    """Drift of ⟨ψ(t)|A(t)|ψ(t)⟩ along the schedule for an arbitrary
    operator path A(t)."""
    traj = evolve_td(schedule, psi0, times, step=step)
    operators = np.stack([np.asarray(operator_fn(t), dtype=complex) for t in traj.times])
    values = _pairing_series(traj.states, operators, traj.states)
    return float(np.max(np.abs(values - values[0])))
