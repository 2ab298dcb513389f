import numpy as np
from dataclasses import dataclass

from core.registry import register_potential
from core.potential import LocalPotential, PotentialConfig


@dataclass
class ComplexAbsorbingConfig(PotentialConfig):
    gamma0: float = 1.0
    width: float = 1.0


class ComplexAbsorbing(LocalPotential[ComplexAbsorbingConfig]):
    """V(x) = -iΓ(x) with Γ(x) = Γ0 exp(-x²/σ²) >= 0 for Γ0 >= 0."""

    name = "ComplexAbsorbing"

    def values(self, x: np.ndarray) -> np.ndarray:
        return -1j * self.config.gamma0 * np.exp(-(x**2) / self.config.width**2)


register_potential(ComplexAbsorbing, ComplexAbsorbingConfig)
