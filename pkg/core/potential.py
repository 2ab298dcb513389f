import numpy as np
from dacite import from_dict, Config, DaciteError
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Generic, TypeVar

from core.grid import Grid, Operator
from core.errors import ConfigError
from core.registry import POTENTIAL_TO_CLASS, POTENTIAL_TO_CONFIG


@dataclass
class PotentialConfig:
    pass


@dataclass
class PotentialSpec:
    """A potential kind and its named parameters, as read from a run
    config."""

    kind: str
    parameters: Dict[str, Any] = field(default_factory=dict)


T = TypeVar("T", bound=PotentialConfig)


class Potential(ABC, Generic[T]):
    name: str
    model_space: bool = False

    def __init__(self, config: T):
        """Defines the interface implemented by all potential kinds. A
        potential turns its parameters into a matrix ⟨x_j|V|x_k⟩ on a grid.

        :param config: PotentialConfig
            Parameters of the potential, validated by the kind's own
            dataclass.
        """

        self.config = config

    def build(self, grid: Grid) -> Operator:
        """Builds the Position-basis matrix of the potential on the grid.

        :param grid: Grid
            The grid to build the potential on.
        :return: Operator
            The potential matrix.
        """

        return Operator(self._matrix(grid), grid)

    @abstractmethod
    def _matrix(self, grid: Grid) -> np.ndarray:
        """The method implemented by all potential kinds.

        :param grid: Grid
            The grid to build the potential on.
        :return: np.ndarray
            Complex n×n matrix.
        """
        raise NotImplementedError


class LocalPotential(Potential[T]):
    """Potentials diagonal in the Position basis, V(x_j) δ_jk."""

    def _matrix(self, grid: Grid) -> np.ndarray:
        return np.diag(np.asarray(self.values(grid.points), dtype=complex))

    @abstractmethod
    def values(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def resolve_potential(spec: PotentialSpec) -> Potential:
    """Looks up the kind in the registry and validates its parameters."""
    if spec.kind not in POTENTIAL_TO_CLASS:
        raise ConfigError(
            f"unknown potential kind {spec.kind!r}, "
            f"available: {sorted(POTENTIAL_TO_CLASS)}"
        )
    try:
        config = from_dict(
            data_class=POTENTIAL_TO_CONFIG[spec.kind],
            data=dict(spec.parameters),
            config=Config(strict=True, cast=[float]),
        )
    except (DaciteError, ValueError, TypeError) as e:
        raise ConfigError(f"invalid parameters for {spec.kind}: {e}") from e
    return POTENTIAL_TO_CLASS[spec.kind](config)
