import numpy as np
from dataclasses import dataclass

from core.grid import Grid
from core.registry import register_potential
from core.potential import Potential, PotentialConfig


@dataclass
class NonlocalSeparableConfig(PotentialConfig):
    coupling: float = 1.0
    u_center: float = 0.0
    u_width: float = 1.0
    u_momentum: float = 0.0
    w_center: float = 0.0
    w_width: float = 1.0
    w_momentum: float = 0.0


def _form_factor(x: np.ndarray, center: float, width: float, momentum: float):
    return np.exp(-((x - center) ** 2) / (2 * width**2) + 1j * momentum * x)


class NonlocalSeparable(Potential[NonlocalSeparableConfig]):
    """Rank-one kernel ⟨x_j|V|x_k⟩ = λ u(x_j) w(x_k)* with Gaussian form
    factors. Hermitian only when u and w coincide."""

    name = "NonlocalSeparable"

    def _matrix(self, grid: Grid) -> np.ndarray:
        c = self.config
        u = _form_factor(grid.points, c.u_center, c.u_width, c.u_momentum / grid.hbar)
        w = _form_factor(grid.points, c.w_center, c.w_width, c.w_momentum / grid.hbar)
        return c.coupling * np.outer(u, w.conj())


register_potential(NonlocalSeparable, NonlocalSeparableConfig)
