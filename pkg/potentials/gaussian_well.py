import numpy as np
from dataclasses import dataclass

from core.registry import register_potential
from core.potential import LocalPotential, PotentialConfig


@dataclass
class RealGaussianWellConfig(PotentialConfig):
    depth: float = 1.0
    width: float = 1.0


class RealGaussianWell(LocalPotential[RealGaussianWellConfig]):
    """V(x) = -D exp(-x²/2σ²). Real and even, so every one of the eight
    symmetries holds; depth 0 gives the free particle."""

    name = "RealGaussianWell"

    def values(self, x: np.ndarray) -> np.ndarray:
        return -self.config.depth * np.exp(-(x**2) / (2 * self.config.width**2))


register_potential(RealGaussianWell, RealGaussianWellConfig)
