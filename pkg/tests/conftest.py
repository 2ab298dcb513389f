import json
import numpy as np
import pytest
from pathlib import Path

from core.grid import Grid, Operator, make_grid, model_grid
from core.potential import PotentialSpec
from core.hamiltonian import build_hamiltonian

CONFIGS = Path(__file__).parent / "configs"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def grid5() -> Grid:
    return make_grid(5, 2.0)


@pytest.fixture
def grid63() -> Grid:
    return make_grid(63, 10.0)


@pytest.fixture
def two_level() -> Grid:
    return model_grid()


@pytest.fixture
def random_operator(rng):
    def build(grid: Grid, scale: float = 1.0) -> Operator:
        n = grid.n
        matrix = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return Operator(scale * matrix / np.sqrt(2 * n), grid)

    return build


@pytest.fixture
def hamiltonian():
    def build(grid: Grid, kind: str, **parameters) -> Operator:
        return build_hamiltonian(grid, PotentialSpec(kind, parameters))

    return build


@pytest.fixture
def write_config(tmp_path):
    """Writes a run config to tmp_path and points its outputs there."""

    def write(data: dict, name: str = "config.json") -> Path:
        data = {"outputs": str(tmp_path / "out"), **data}
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write
