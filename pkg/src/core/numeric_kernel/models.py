from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np

from core.errors import InputError


@dataclass(frozen=True)
class Grid:
    """Uniform grid with both endpoints included."""

    x_lo: float
    x_hi: float
    n: int

    MIN_POINTS: ClassVar[int] = 16

    def __post_init__(self) -> None:
        if self.n < self.MIN_POINTS:
            raise InputError(f"grid needs at least {self.MIN_POINTS} points, got {self.n}")
        if not (np.isfinite(self.x_lo) and np.isfinite(self.x_hi)):
            raise InputError("grid endpoints must be finite")
        if self.x_hi <= self.x_lo:
            raise InputError(f"empty grid interval [{self.x_lo}, {self.x_hi}]")

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n)

    def refined(self) -> "Grid":
        return Grid(self.x_lo, self.x_hi, 2 * self.n - 1)

    def coarsened(self) -> "Grid":
        if (self.n - 1) % 2:
            raise InputError("only grids with an even number of panels can be coarsened")
        return Grid(self.x_lo, self.x_hi, (self.n + 1) // 2)


@dataclass(frozen=True)
class SampledFunction:
    """Complex samples of a function on a grid; real functions carry zero imaginary parts."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n,):
            raise InputError(
                f"expected {self.grid.n} samples, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(
        cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]
    ) -> "SampledFunction":
        return cls(grid, fn(grid.points))

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    def with_values(self, values: np.ndarray) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        return self.with_values(self.values - other.values)

    def scaled(self, factor: complex | np.ndarray) -> "SampledFunction":
        return self.with_values(self.values * factor)

    def subsampled(self) -> "SampledFunction":
        """Every other sample, on the coarsened grid."""
        return SampledFunction(self.grid.coarsened(), self.values[::2])


@dataclass(frozen=True)
class TridiagonalSymmetric:
    """Symmetric tridiagonal matrix, optionally tied to the interior of a grid."""

    diag: np.ndarray
    offdiag: np.ndarray
    grid: Grid | None = None

    def __post_init__(self) -> None:
        diag = np.array(self.diag, dtype=float)
        offdiag = np.array(self.offdiag, dtype=float)
        if diag.ndim != 1 or diag.size == 0:
            raise InputError("diagonal must be a non-empty vector")
        if offdiag.shape != (diag.size - 1,):
            raise InputError(
                f"off-diagonal must have length {diag.size - 1}, got {offdiag.size}"
            )
        diag.setflags(write=False)
        offdiag.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def size(self) -> int:
        return self.diag.size

    @property
    def h(self) -> float:
        return self.grid.h if self.grid is not None else 1.0

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def gershgorin(self) -> tuple[float, float]:
        radius = np.zeros(self.size)
        radius[:-1] += np.abs(self.offdiag)
        radius[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - radius)), float(np.max(self.diag + radius))


@dataclass(frozen=True)
class Eigenpair:
    value: float
    vector: np.ndarray
    residual: float
    state: SampledFunction | None = field(default=None, repr=False)

    def boundary_abs(self) -> tuple[float, float]:
        """|psi| at the first and last interior samples (Dirichlet zeros sit outside)."""
        return float(abs(self.vector[0])), float(abs(self.vector[-1]))
