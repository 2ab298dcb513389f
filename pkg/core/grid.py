import numpy as np
from pathlib import Path
from numbers import Number
from functools import lru_cache, cached_property
from dataclasses import dataclass, replace
from typing import Union

from core.types import Basis
from core.errors import DomainError, InputError, InvalidArgumentError


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid with both endpoints included.

    :param n: int
        Number of points.
    :param x_min: float
        First grid point.
    :param x_max: float
        Last grid point.
    :param hbar: float
        Reduced Planck constant in the grid's action units.
    :param mass: float
        Particle mass.
    """

    n: int
    x_min: float
    x_max: float
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError(f"grid needs at least one point, got n={self.n}")
        if self.x_max < self.x_min or (self.n > 1 and self.x_max == self.x_min):
            raise InvalidArgumentError(
                f"invalid grid extent [{self.x_min}, {self.x_max}] for n={self.n}"
            )
        if self.hbar <= 0 or self.mass <= 0:
            raise InvalidArgumentError("hbar and mass must be positive")

    @property
    def dx(self) -> float:
        if self.n == 1:
            return 0.0
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def is_symmetric(self) -> bool:
        return self.x_min == -self.x_max

    @cached_property
    def points(self) -> np.ndarray:
        if self.is_symmetric:
            # x_j = -x_{n-1-j} exactly
            points = self.dx * (np.arange(self.n) - (self.n - 1) / 2)
        else:
            points = self.x_min + self.dx * np.arange(self.n)
        points[0], points[-1] = self.x_min, self.x_max
        points.flags.writeable = False
        return points

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer frequency labels k in {-floor(n/2), ..., ceil(n/2)-1}."""
        k = np.arange(self.n) - self.n // 2
        k.flags.writeable = False
        return k

    @cached_property
    def momenta(self) -> np.ndarray:
        if self.n == 1:
            momenta = np.zeros(1)
        else:
            momenta = self.hbar * 2 * np.pi * self.wavenumbers / (self.n * self.dx)
        momenta.flags.writeable = False
        return momenta


def make_grid(n: int, x_max: float, hbar: float = 1.0, mass: float = 1.0) -> Grid:
    """Builds the symmetric grid [-x_max, x_max] with n points. Odd n keeps
    parity exact in the momentum representation as well."""
    if n < 2:
        raise InvalidArgumentError(f"n must be at least 2, got {n}")
    if x_max <= 0:
        raise InvalidArgumentError(f"x_max must be positive, got {x_max}")
    return Grid(n=int(n), x_min=-float(x_max), x_max=float(x_max), hbar=hbar, mass=mass)


def model_grid(hbar: float = 1.0, mass: float = 1.0) -> Grid:
    """Two-point grid hosting two-level model spaces; parity swaps the
    levels."""
    return make_grid(2, 1.0, hbar=hbar, mass=mass)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tagged with its representation basis."""

    matrix: np.ndarray
    grid: Grid
    basis: Basis = Basis.POSITION

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (self.grid.n, self.grid.n):
            raise InvalidArgumentError(
                f"matrix shape {matrix.shape} does not match grid size {self.grid.n}"
            )
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @property
    def n(self) -> int:
        return self.grid.n

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def dagger(self) -> "Operator":
        return replace(self, matrix=self.matrix.conj().T)

    def to_momentum(self) -> "Operator":
        if self.basis is Basis.MOMENTUM:
            return self
        fourier = momentum_map(self.grid).matrix
        return replace(
            self,
            matrix=fourier @ self.matrix @ fourier.conj().T,
            basis=Basis.MOMENTUM,
        )

    def to_position(self) -> "Operator":
        if self.basis is Basis.POSITION:
            return self
        fourier = momentum_map(self.grid).matrix
        return replace(
            self,
            matrix=fourier.conj().T @ self.matrix @ fourier,
            basis=Basis.POSITION,
        )

    def in_basis(self, basis: Basis) -> "Operator":
        return self.to_momentum() if basis is Basis.MOMENTUM else self.to_position()

    def check_compatible(self, other: "Operator") -> None:
        if other.grid != self.grid or other.basis != self.basis:
            raise InvalidArgumentError(
                f"operators live on different grids or bases "
                f"({self.basis.value} vs {other.basis.value})"
            )

    def __add__(self, other: "Operator") -> "Operator":
        self.check_compatible(other)
        return replace(self, matrix=self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self.check_compatible(other)
        return replace(self, matrix=self.matrix - other.matrix)

    def __matmul__(self, other: Union["Operator", np.ndarray]):
        if isinstance(other, Operator):
            self.check_compatible(other)
            return replace(self, matrix=self.matrix @ other.matrix)
        return self.matrix @ other

    def __mul__(self, scalar: Number) -> "Operator":
        return replace(self, matrix=scalar * self.matrix)

    __rmul__ = __mul__


@lru_cache(maxsize=32)
def _fourier_matrix(grid: Grid) -> np.ndarray:
    n = grid.n
    if grid.is_symmetric:
        offset = -(n - 1) / 2
    else:
        offset = grid.x_min / grid.dx if n > 1 else 0.0
    # p_k x_j / hbar = 2 pi k (j + offset) / n, reduced mod n before exp
    cycles = np.mod(np.outer(grid.wavenumbers, np.arange(n) + offset), n)
    fourier = np.exp(-2j * np.pi * cycles / n) / np.sqrt(n)
    fourier.flags.writeable = False
    return fourier


def momentum_map(grid: Grid) -> Operator:
    """Unitary map F from position to momentum amplitudes,
    F_kj = exp(-i p_k x_j / hbar) / sqrt(n), rows ordered by increasing p so
    that p and -p sit in index-reversed slots for odd n."""
    return Operator(_fourier_matrix(grid), grid, Basis.MOMENTUM)


def parity_matrix(grid: Grid) -> Operator:
    if not grid.is_symmetric:
        raise DomainError(
            f"parity is undefined on the asymmetric grid [{grid.x_min}, {grid.x_max}]"
        )
    return Operator(np.eye(grid.n)[::-1], grid)


def kinetic_operator(grid: Grid) -> Operator:
    """H0 = P^2 / 2m built spectrally, F^dagger diag(p^2/2m) F."""
    fourier = _fourier_matrix(grid)
    energies = grid.momenta**2 / (2 * grid.mass)
    return Operator((fourier.conj().T * energies) @ fourier, grid)


def position_operator(grid: Grid) -> Operator:
    return Operator(np.diag(grid.points), grid)


def gaussian_state(
    grid: Grid, center: float = 0.0, width: float = 1.0, momentum: float = 0.0
) -> np.ndarray:
    """Gaussian wave packet normalized to unit vector norm on the grid."""
    if width <= 0:
        raise InvalidArgumentError(f"width must be positive, got {width}")
    x = grid.points
    psi = np.exp(-((x - center) ** 2) / (2 * width**2) + 1j * momentum * x / grid.hbar)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise DomainError("Gaussian state vanishes on the grid")
    return psi / norm


def load_state(path: Union[str, Path], grid: Grid) -> np.ndarray:
    """Reads a state from a CSV of n rows "Re,Im" and normalizes it."""
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read state file {path}: {e}") from e
    if data.shape != (grid.n, 2):
        raise InputError(
            f"state file {path} has shape {data.shape}, expected ({grid.n}, 2)"
        )
    if not np.all(np.isfinite(data)):
        raise InputError(f"state file {path} has non-finite entries")
    psi = data[:, 0] + 1j * data[:, 1]
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InputError(f"state file {path} holds the zero vector")
    if not np.isfinite(norm):
        raise InputError(f"state file {path} overflows on normalization")
    return psi / norm
