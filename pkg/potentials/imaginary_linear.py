import numpy as np
from dataclasses import dataclass

from core.registry import register_potential
from core.potential import LocalPotential, PotentialConfig


@dataclass
class ImaginaryLinearConfig(PotentialConfig):
    gamma: float = 1.0


class ImaginaryLinear(LocalPotential[ImaginaryLinearConfig]):
    name = "ImaginaryLinear"

    def values(self, x: np.ndarray) -> np.ndarray:
        return 1j * self.config.gamma * x


register_potential(ImaginaryLinear, ImaginaryLinearConfig)
