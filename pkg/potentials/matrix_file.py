import numpy as np
from pathlib import Path
from dataclasses import dataclass
from typing import Union

from core.grid import Grid
from core.errors import InputError
from core.registry import register_potential
from core.potential import Potential, PotentialConfig


@dataclass
class MatrixFileConfig(PotentialConfig):
    path: str


class MatrixFile(Potential[MatrixFileConfig]):
    """User-supplied ⟨x_j|V|x_k⟩ read from CSV: n rows of 2n columns,
    alternating real and imaginary parts."""

    name = "MatrixFile"

    def _matrix(self, grid: Grid) -> np.ndarray:
        return read_matrix_file(self.config.path, grid.n)


def read_matrix_file(path: Union[str, Path], n: int) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read matrix file {path}: {e}") from e
    if data.shape != (n, 2 * n):
        raise InputError(
            f"matrix file {path} has shape {data.shape}, expected ({n}, {2 * n})"
        )
    if not np.all(np.isfinite(data)):
        raise InputError(f"matrix file {path} has non-finite entries")
    return data[:, 0::2] + 1j * data[:, 1::2]


def write_matrix_file(path: Union[str, Path], matrix: np.ndarray) -> None:
    """Writes a complex matrix in the format read back bit-exactly by
    MatrixFile."""
    matrix = np.asarray(matrix, dtype=complex)
    data = np.empty((matrix.shape[0], 2 * matrix.shape[1]))
    data[:, 0::2] = matrix.real
    data[:, 1::2] = matrix.imag
    np.savetxt(path, data, delimiter=",", fmt="%.17g")


register_potential(MatrixFile, MatrixFileConfig)
