from enum import Enum
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from core.potential import PotentialSpec
from core.types import Basis, Variant


class InitialStateKind(str, Enum):
    GAUSSIAN = "Gaussian"
    FILE = "File"
    LEVEL = "Level"


class ScheduleKind(str, Enum):
    CONSTANT = "Constant"
    DRIVEN_TWO_LEVEL = "DrivenTwoLevel"
    ROTATING_TWO_LEVEL = "RotatingTwoLevel"
    MODULATED_POTENTIAL = "ModulatedPotential"


class InitialInvariant(str, Enum):
    HAMILTONIAN = "Hamiltonian"
    IDENTITY = "Identity"
    IDENTITY_PERTURBATION = "IdentityPerturbation"


class Observable(str, Enum):
    PARITY = "Parity"
    HAMILTONIAN = "Hamiltonian"


@dataclass
class GridConfig:
    n: int = 63
    x_max: float = 10.0
    hbar: float = 1.0
    mass: float = 1.0


@dataclass
class TimesConfig:
    t_max: float = 1.0
    samples: int = 101


@dataclass
class InitialStateConfig:
    kind: InitialStateKind = InitialStateKind.GAUSSIAN
    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0
    path: Optional[str] = None
    level: int = 0


@dataclass
class ScheduleConfig:
    kind: ScheduleKind = ScheduleKind.CONSTANT
    delta: float = 1.0
    omega0: float = 1.0
    frequency: float = 1.0
    loss: float = 0.0
    amplitude: float = 0.5


@dataclass
class InvariantConfig:
    variant: Variant = Variant.PLAIN
    initial: InitialInvariant = InitialInvariant.HAMILTONIAN
    perturbation: float = 0.1


@dataclass
class RunConfig:
    """One reproducible run. Every command reads the sections it needs and
    ignores the others."""

    potential: PotentialSpec
    grid: GridConfig = field(default_factory=GridConfig)
    tolerance: float = 1e-10
    eig_tolerance: float = 1e-8
    basis: Basis = Basis.POSITION
    times: TimesConfig = field(default_factory=TimesConfig)
    initial_state: InitialStateConfig = field(default_factory=InitialStateConfig)
    outputs: str = "outputs"
    seed: int = 0
    step: Optional[float] = None
    schedule: Optional[ScheduleConfig] = None
    invariant: InvariantConfig = field(default_factory=InvariantConfig)
    observable: Observable = Observable.PARITY
    cross_check: bool = False


def _number(minimum: Optional[float] = None, exclusive: bool = False) -> Dict[str, Any]:
    schema: Dict[str, Any] = {"type": "number"}
    if minimum is not None:
        schema["exclusiveMinimum" if exclusive else "minimum"] = minimum
    return schema


def _section(properties: Dict[str, Any], required=()) -> Dict[str, Any]:
    return {
        "type": "object",
        "properties": properties,
        "required": list(required),
        "additionalProperties": False,
    }


def _enum(enum_class) -> Dict[str, Any]:
    return {"enum": [member.value for member in enum_class]}


RUN_CONFIG_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    **_section(
        {
            "grid": _section(
                {
                    "n": {"type": "integer", "minimum": 2},
                    "x_max": _number(0, exclusive=True),
                    "hbar": _number(0, exclusive=True),
                    "mass": _number(0, exclusive=True),
                }
            ),
            "potential": _section(
                {
                    "kind": {"type": "string"},
                    "parameters": {
                        "type": "object",
                        "additionalProperties": {"type": ["number", "string"]},
                    },
                },
                required=("kind",),
            ),
            "tolerance": _number(0, exclusive=True),
            "eig_tolerance": _number(0, exclusive=True),
            "basis": _enum(Basis),
            "times": _section(
                {
                    "t_max": _number(0),
                    "samples": {"type": "integer", "minimum": 1},
                }
            ),
            "initial_state": _section(
                {
                    "kind": _enum(InitialStateKind),
                    "center": _number(),
                    "width": _number(0, exclusive=True),
                    "momentum": _number(),
                    "path": {"type": "string"},
                    "level": {"type": "integer", "minimum": 0},
                }
            ),
            "outputs": {"type": "string"},
            "seed": {"type": "integer", "minimum": 0},
            "step": _number(0, exclusive=True),
            "schedule": _section(
                {
                    "kind": _enum(ScheduleKind),
                    "delta": _number(),
                    "omega0": _number(),
                    "frequency": _number(),
                    "loss": _number(0),
                    "amplitude": _number(),
                }
            ),
            "invariant": _section(
                {
                    "variant": _enum(Variant),
                    "initial": _enum(InitialInvariant),
                    "perturbation": _number(),
                }
            ),
            "observable": _enum(Observable),
            "cross_check": {"type": "boolean"},
        },
        required=("potential",),
    ),
}
