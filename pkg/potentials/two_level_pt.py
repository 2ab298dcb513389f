import numpy as np
from dataclasses import dataclass

from core.grid import Grid
from core.errors import DomainError
from core.registry import register_potential
from core.potential import Potential, PotentialConfig


@dataclass
class TwoLevelPTConfig(PotentialConfig):
    gamma: float = 0.0
    kappa: float = 1.0


class TwoLevelPT(Potential[TwoLevelPTConfig]):
    """H = [[iγ, κ], [κ, -iγ]] on a two-level model space, with eigenvalues
    ±sqrt(κ² - γ²) and an exceptional point at γ = κ. The matrix is the full
    Hamiltonian: no kinetic term is added."""

    name = "TwoLevelPT"
    model_space = True

    def _matrix(self, grid: Grid) -> np.ndarray:
        if grid.n != 2:
            raise DomainError(f"TwoLevelPT lives on a two-level space, got n={grid.n}")
        g, k = self.config.gamma, self.config.kappa
        return np.array([[1j * g, k], [k, -1j * g]], dtype=complex)


register_potential(TwoLevelPT, TwoLevelPTConfig)
