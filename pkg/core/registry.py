from typing import Dict, Type, TYPE_CHECKING

if TYPE_CHECKING:
    from core.potential import Potential, PotentialConfig

POTENTIAL_TO_CLASS: Dict[str, Type["Potential"]] = {}
POTENTIAL_TO_CONFIG: Dict[str, Type["PotentialConfig"]] = {}


def register_potential(
    potential_class: Type["Potential"], config_class: Type["PotentialConfig"]
):
    POTENTIAL_TO_CLASS[potential_class.name] = potential_class
    POTENTIAL_TO_CONFIG[potential_class.name] = config_class
