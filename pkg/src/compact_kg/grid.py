"""Uniform periodic 1D grids, grid functions and difference operators.

A grid function stores the M values u_0..u_{M-1}; the periodic copy u_M = u_0
is implied and all stencils wrap around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GridMismatchError


@dataclass(frozen=True)
class PeriodicGrid:
    a: float
    b: float
    M: int

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise ConfigError(f"grid needs a < b, got a={self.a}, b={self.b}")
        if int(self.M) != self.M or self.M < 4 or self.M % 2:
            raise ConfigError(f"M must be an even integer >= 4, got {self.M}")
        object.__setattr__(self, "M", int(self.M))

    @classmethod
    def from_mesh_size(cls, a: float, b: float, h: float) -> "PeriodicGrid":
        """Grid on (a, b) with M = (b - a)/h rounded to the nearest even integer."""
        M = 2 * max(2, int(round((b - a) / h / 2.0)))
        return cls(a, b, M)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.M

    @property
    def x(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.M)

    def is_refinement_of(self, coarse: "PeriodicGrid") -> bool:
        """True when every node of ``coarse`` is also a node of this grid."""
        return (
            self.a == coarse.a
            and self.b == coarse.b
            and self.M % coarse.M == 0
        )

    def sample(self, f) -> "GridFunction":
        return GridFunction(self, np.asarray(f(self.x), dtype=float) * np.ones(self.M))


class GridFunction:
    """Real values on the nodes of a :class:`PeriodicGrid`.

    Library operations never mutate ``values``; they return new functions.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: PeriodicGrid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.M,):
            raise GridMismatchError(
                f"expected {grid.M} values for this grid, got shape {values.shape}"
            )
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.M))

    @classmethod
    def constant(cls, grid: PeriodicGrid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.M, float(c)))

    def _check(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values + other.values)
        return GridFunction(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values - other.values)
        return GridFunction(self.grid, self.values - other)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __len__(self):
        return self.grid.M

    def __repr__(self):
        return f"GridFunction(M={self.grid.M}, h={self.grid.h:.4g})"

    def shift(self, k: int) -> "GridFunction":
        """Cyclic rotation: result_j = u_{j+k}."""
        return GridFunction(self.grid, np.roll(self.values, -k))

    def restrict(self, coarse: PeriodicGrid) -> "GridFunction":
        """Injection onto a coarser grid whose nodes are a subset of this one's."""
        if not self.grid.is_refinement_of(coarse):
            raise ConfigError(
                f"grid M={coarse.M} on ({coarse.a}, {coarse.b}) does not nest in "
                f"M={self.grid.M} on ({self.grid.a}, {self.grid.b})"
            )
        stride = self.grid.M // coarse.M
        return GridFunction(coarse, self.values[::stride])


def same_grid(u: GridFunction, v: GridFunction) -> PeriodicGrid:
    if u.grid != v.grid:
        raise GridMismatchError(f"grid mismatch: {u.grid} vs {v.grid}")
    return u.grid


# Raw-array stencils, used directly inside the time-stepping loops.

def _forward(values: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(values, -1) - values) / h


def _backward(values: np.ndarray, h: float) -> np.ndarray:
    return (values - np.roll(values, 1)) / h


def _second(values: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / (h * h)


def forward_diff(u: GridFunction) -> GridFunction:
    return GridFunction(u.grid, _forward(u.values, u.grid.h))


def backward_diff(u: GridFunction) -> GridFunction:
    return GridFunction(u.grid, _backward(u.values, u.grid.h))


def second_diff(u: GridFunction) -> GridFunction:
    return GridFunction(u.grid, _second(u.values, u.grid.h))


def inner(u: GridFunction, v: GridFunction) -> float:
    grid = same_grid(u, v)
    return grid.h * math.fsum(u.values * v.values)


def norm_l2(u: GridFunction) -> float:
    scale = float(np.max(np.abs(u.values)))
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    # scaled to avoid underflow/overflow of the squares
    w = u.values / scale
    return scale * math.sqrt(u.grid.h * math.fsum(w * w))


def norm_linf(u: GridFunction) -> float:
    return float(np.max(np.abs(u.values)))
