import sys
import numpy as np
from pathlib import Path
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from core.config import (
    InitialStateKind,
    Observable,
    RunConfig,
    RUN_CONFIG_SCHEMA,
    ScheduleKind,
)
from core.grid import Grid, Operator, gaussian_state, load_state, make_grid, model_grid, parity_matrix
from core.potential import resolve_potential
from core.hamiltonian import (
    biorthogonal_eig,
    build_hamiltonian,
    conjugation_closure,
    resolution_residual,
)
from core.symmetry import classify, relation_residual
from core.klein import random_density_matrix, table_superoperators, verify_group, wigner_check
from core.dynamics import (
    conservation_audit,
    dual_pairing,
    evolve,
    expectation_record,
    norm_bound,
    rate_audit,
)
from core.invariants import (
    HamiltonianSchedule,
    constant_schedule,
    convergence_ratio,
    driven_two_level,
    initial_invariant,
    integrate_invariant,
    invariant_audit,
    invariant_closed_form,
    modulated_potential,
    rotating_two_level,
)
from core.errors import ConfigError, InvalidArgumentError, ToolkitError
from core.profile import profile_command
from core.types import ExitCode, Relation, SymmetryCode
from core.utils import (
    disable_print,
    format_residual,
    load_config,
    print_table,
    save_csv,
    save_json,
)

WIGNER_PAIRS = 20
CONJUGATION_TOLERANCE = 1e-8


def build_setting(config: RunConfig) -> Tuple[Grid, Operator]:
    """Grid and Hamiltonian of a run. Model-space potentials live on the
    two-point model grid; the grid section then only supplies ħ and m."""
    g = config.grid
    potential = resolve_potential(config.potential)
    if potential.model_space:
        grid = model_grid(hbar=g.hbar, mass=g.mass)
    else:
        grid = make_grid(g.n, g.x_max, hbar=g.hbar, mass=g.mass)
    return grid, build_hamiltonian(grid, config.potential)


def initial_state(config: RunConfig, grid: Grid) -> np.ndarray:
    s = config.initial_state
    if s.kind is InitialStateKind.FILE:
        if s.path is None:
            raise ConfigError("initial_state of kind File needs a path")
        return load_state(s.path, grid)
    if s.kind is InitialStateKind.LEVEL:
        if s.level >= grid.n:
            raise ConfigError(f"level {s.level} out of range for n={grid.n}")
        psi = np.zeros(grid.n, dtype=complex)
        psi[s.level] = 1.0
        return psi
    return gaussian_state(grid, s.center, s.width, s.momentum)


def sample_times(config: RunConfig) -> np.ndarray:
    return np.linspace(0.0, config.times.t_max, config.times.samples)


def _out(config: RunConfig) -> Path:
    path = Path(config.outputs)
    path.mkdir(parents=True, exist_ok=True)
    return path


@dataclass
class ClassifySummary:
    potential: str
    n: int
    basis: str
    tolerance: float
    codes: Dict[str, Dict[str, object]]
    held: List[str]
    closed_under_composition: bool
    predicts_conjugate_spectrum: bool


@profile_command("classify")
def cmd_classify(config: RunConfig, halve_step: bool = False) -> ExitCode:
    grid, H = build_setting(config)
    report = classify(H, grid, config.tolerance, config.basis)

    print_table(
        ["Code", "Klein", "Relation", "Residual", "Holds"],
        [
            [code.value, code.klein.value, code.relation.value,
             format_residual(report.entries[code.value].residual),
             report.entries[code.value].holds]
            for code in SymmetryCode
        ],
        title=f"{config.potential.kind} on n={grid.n} ({report.basis.value})",
    )
    summary = ClassifySummary(
        potential=config.potential.kind,
        n=grid.n,
        basis=report.basis.value,
        tolerance=report.tolerance,
        codes={
            code: {"residual": entry.residual, "holds": entry.holds}
            for code, entry in report.entries.items()
        },
        held=[code.value for code in report.held],
        closed_under_composition=report.closed_under_composition,
        predicts_conjugate_spectrum=report.predicts_conjugate_spectrum,
    )
    save_json(_out(config) / "classify.json", summary)
    print(f"[classify] held codes: {', '.join(summary.held)}")
    return ExitCode.OK


@dataclass
class SpectrumSummary:
    potential: str
    n: int
    method: str
    eigvec_condition: float
    biorthonormality_residual: float
    resolution_residual: float
    right_residual: float
    left_residual: float
    conjugation_distance: float
    closed_under_conjugation: bool
    eigenvalues: List[complex]


@profile_command("spectrum")
def cmd_spectrum(config: RunConfig, halve_step: bool = False) -> ExitCode:
    grid, H = build_setting(config)
    system = biorthogonal_eig(H, config.eig_tolerance)
    distance = conjugation_closure(system.eigenvalues)

    summary = SpectrumSummary(
        potential=config.potential.kind,
        n=grid.n,
        method=system.method,
        eigvec_condition=system.eigvec_condition,
        biorthonormality_residual=system.biorthonormality_residual(),
        resolution_residual=resolution_residual(system, H),
        right_residual=system.right_residual(H.matrix),
        left_residual=system.left_residual(H.matrix),
        conjugation_distance=distance,
        closed_under_conjugation=distance <= CONJUGATION_TOLERANCE * max(1.0, H.norm()),
        eigenvalues=list(system.eigenvalues),
    )
    out = _out(config)
    save_json(out / "spectrum.json", summary)
    save_csv(
        out / "spectrum.csv",
        ["index", "re", "im"],
        [(j, E.real, E.imag) for j, E in enumerate(system.eigenvalues)],
    )
    print_table(
        ["Quantity", "Value"],
        [
            ["method", system.method],
            ["eigenvector condition", f"{system.eigvec_condition:.3e}"],
            ["biorthonormality residual", format_residual(summary.biorthonormality_residual)],
            ["resolution residual", format_residual(summary.resolution_residual)],
            ["conjugation distance", format_residual(distance)],
        ],
        title=f"spectrum of {config.potential.kind}",
    )
    return ExitCode.OK


def _observable(config: RunConfig, grid: Grid, H: Operator) -> Operator:
    if config.observable is Observable.HAMILTONIAN:
        return H
    return parity_matrix(grid)


@dataclass
class EvolveSummary:
    potential: str
    observable: str
    n: int
    t_max: float
    samples: int
    relation_residuals: Dict[str, float]
    audits: List[object]
    norm_drift: float
    norm_nonincreasing: bool
    dual_overlap_drift: float
    rates: object


@profile_command("evolve")
def cmd_evolve(config: RunConfig, halve_step: bool = False) -> ExitCode:
    grid, H = build_setting(config)
    psi0 = initial_state(config, grid)
    times = sample_times(config)
    A = _observable(config, grid, H)
    name = config.observable.value

    traj = evolve(
        H, psi0, times, with_dual=True, method="cross_check" if config.cross_check else "pade"
    )

    residuals = {
        relation.value: relation_residual(H, A, relation) for relation in Relation
    }
    audits = [
        conservation_audit(H, A, relation, traj, name=name, tol=config.tolerance)
        for relation in Relation
        if residuals[relation.value] <= config.tolerance
    ]
    for audit in audits:
        audit.record = None

    record = expectation_record(traj, A, name)
    paired = dual_pairing(traj, A)
    overlap = dual_pairing(traj, np.eye(grid.n))
    if np.allclose(A.matrix, A.matrix.conj().T, rtol=0, atol=1e-12):
        bound = abs(record.values[0]) / norm_bound(A)
        margins = traj.norms - bound
    else:
        margins = np.full(len(times), np.nan)

    rates = rate_audit(H, A, psi0)
    summary = EvolveSummary(
        potential=config.potential.kind,
        observable=name,
        n=grid.n,
        t_max=config.times.t_max,
        samples=config.times.samples,
        relation_residuals=residuals,
        audits=audits,
        norm_drift=float(np.max(np.abs(traj.norms - 1))),
        norm_nonincreasing=bool(np.all(np.diff(traj.norms) <= 1e-12)),
        dual_overlap_drift=float(np.max(np.abs(overlap - 1))),
        rates=rates,
    )

    out = _out(config)
    save_json(out / "evolve.json", summary)
    save_csv(
        out / "evolve.csv",
        [
            "t", "norm", "re_expectation", "im_expectation", "re_product",
            "im_product", "re_dual_pairing", "im_dual_pairing", "re_dual_overlap",
            "im_dual_overlap", "bound_margin",
        ],
        [
            (
                t, N, value.real, value.imag, product.real, product.imag,
                pair.real, pair.imag, ov.real, ov.imag, margin,
            )
            for t, N, value, product, pair, ov, margin in zip(
                times, traj.norms, record.values, record.conserved_quantity,
                paired, overlap, margins,
            )
        ],
    )
    print_table(
        ["Relation", "Residual", "Drift", "Passed"],
        [
            [a.relation.value, format_residual(a.relation_residual),
             format_residual(a.drift), a.passed]
            for a in audits
        ],
        title=f"conservation of {name} under {config.potential.kind}",
    )
    print(
        f"[evolve] norm drift {summary.norm_drift:.3e}, "
        f"dual overlap drift {summary.dual_overlap_drift:.3e}, "
        f"norm-rate residual {rates.norm_rate_residual:.3e}"
    )
    return ExitCode.OK


@dataclass
class GroupCheckSummary:
    report: object
    passed: bool
    wigner_seed: int
    wigner_pairs: int
    wigner_max_residual: float


@profile_command("group-check")
def cmd_group_check(config: RunConfig, halve_step: bool = False) -> ExitCode:
    grid, _ = build_setting(config)
    report = verify_group(grid)

    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for superop in table_superoperators(grid).values():
        for _ in range(WIGNER_PAIRS):
            rho1 = random_density_matrix(grid, rng)
            rho2 = random_density_matrix(grid, rng)
            worst = max(worst, wigner_check(superop, rho1, rho2))

    summary = GroupCheckSummary(
        report=report,
        passed=report.passed,
        wigner_seed=config.seed,
        wigner_pairs=WIGNER_PAIRS * len(SymmetryCode),
        wigner_max_residual=worst,
    )
    save_json(_out(config) / "group_check.json", summary)
    print_table(
        ["∘"] + report.elements,
        [[a] + row for a, row in zip(report.elements, report.table)],
        title=f"composition table on n={grid.n}",
    )
    print(f"[group-check] passed: {report.passed}, Wigner residual {worst:.3e}")
    return ExitCode.OK


def build_schedule(config: RunConfig, grid: Grid, H: Operator) -> HamiltonianSchedule:
    s = config.schedule
    if s is None or s.kind is ScheduleKind.CONSTANT:
        return constant_schedule(H)
    if s.kind is ScheduleKind.DRIVEN_TWO_LEVEL:
        return driven_two_level(s.delta, s.omega0, s.frequency, s.loss, config.grid.hbar)
    if s.kind is ScheduleKind.ROTATING_TWO_LEVEL:
        return rotating_two_level(s.delta, s.frequency, config.grid.hbar)
    if resolve_potential(config.potential).model_space:
        raise ConfigError("ModulatedPotential needs a grid potential")
    return modulated_potential(grid, config.potential, s.amplitude, s.frequency)


@dataclass
class PairingSummary:
    name: str
    applicable: bool
    initial_value: complex
    drift: float
    halved_drift: Optional[float] = None
    convergence_ratio: Optional[float] = None


@dataclass
class InvariantSummary:
    schedule: str
    variant: str
    initial: str
    step: float
    hermitian_schedule: bool
    pairings: List[PairingSummary]
    closed_form_residual: Optional[float] = None


@profile_command("invariant")
def cmd_invariant(config: RunConfig, halve_step: bool = False) -> ExitCode:
    grid, H = build_setting(config)
    schedule = build_schedule(config, grid, H)
    psi0 = initial_state(config, schedule.grid)
    times = sample_times(config)
    variant = config.invariant.variant
    I0 = initial_invariant(schedule, config.invariant.initial.value, config.invariant.perturbation)

    track = integrate_invariant(schedule, I0, times, variant, step=config.step)
    audit = invariant_audit(schedule, track, psi0)

    pairings = [
        PairingSummary(p.name, p.applicable, p.initial_value, p.drift) for p in audit.pairings
    ]
    if halve_step:
        halved = invariant_audit(
            schedule,
            integrate_invariant(schedule, I0, times, variant, step=track.step / 2),
            psi0,
        )
        for summary, result in zip(pairings, halved.pairings):
            summary.halved_drift = result.drift
            if summary.applicable:
                summary.convergence_ratio = convergence_ratio(summary.drift, result.drift)

    closed_form = None
    if config.schedule is None or config.schedule.kind is ScheduleKind.CONSTANT:
        scale = np.linalg.norm(I0.matrix) or 1.0
        closed_form = max(
            float(np.linalg.norm(invariant_closed_form(H, I0, t, variant) - I) / scale)
            for t, I in zip(track.times, track.operators)
        )

    summary = InvariantSummary(
        schedule=schedule.name,
        variant=variant.value,
        initial=config.invariant.initial.value,
        step=track.step,
        hermitian_schedule=audit.hermitian_schedule,
        pairings=pairings,
        closed_form_residual=closed_form,
    )
    out = _out(config)
    save_json(out / "invariant.json", summary)
    columns = ["t"]
    for p in audit.pairings:
        columns += [f"re_{p.name}", f"im_{p.name}"]
    save_csv(
        out / "invariant.csv",
        columns,
        [
            [t] + [v for p in audit.pairings for v in (p.values[k].real, p.values[k].imag)]
            for k, t in enumerate(track.times)
        ],
    )
    print_table(
        ["Pairing", "Applicable", "Drift", "Halved drift", "Ratio"],
        [
            [p.name, p.applicable, format_residual(p.drift),
             format_residual(p.halved_drift),
             "n/a" if p.convergence_ratio is None else f"{p.convergence_ratio:.2f}"]
            for p in pairings
        ],
        title=f"{variant.value} invariant along {schedule.name}, step {track.step:g}",
    )
    return ExitCode.OK


COMMANDS: Dict[str, Callable[[RunConfig, bool], ExitCode]] = {
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "group-check": cmd_group_check,
    "invariant": cmd_invariant,
}


def run_command(
    command: str,
    config_path: str,
    out: Optional[str] = None,
    halve_step: bool = False,
    quiet: bool = False,
) -> ExitCode:
    """Loads the config, runs one command and maps failures onto the exit
    code contract, with a diagnostic on standard error."""
    if command not in COMMANDS:
        raise InvalidArgumentError(f"unknown command {command!r}, available: {list(COMMANDS)}")
    try:
        config = load_config(
            RunConfig,
            config_path,
            schema=RUN_CONFIG_SCHEMA,
            overrides={"outputs": out} if out is not None else None,
        )
        if quiet:
            with disable_print():
                return COMMANDS[command](config, halve_step)
        return COMMANDS[command](config, halve_step)
    except ToolkitError as e:
        print(
            f"[{command}] {type(e).__name__}: {e} (exit {int(e.exit_code)})",
            file=sys.stderr,
        )
        return e.exit_code
