"""The compact averaging operator A = 1 + (h^2/12) delta_x^2 on a periodic grid."""

from __future__ import annotations

import math

import numpy as np

from .grid import GridFunction, PeriodicGrid, _backward, _forward, inner
from .errors import GridMismatchError
from .fourier import apply_symbol, rfft_modes


def compact_symbol(M: int, modes=None) -> np.ndarray:
    """(10 + 2 cos(2 pi l / M)) / 12; defaults to the rfft mode layout."""
    l = rfft_modes(M) if modes is None else np.asarray(modes)
    return (10.0 + 2.0 * np.cos(2.0 * np.pi * l / M)) / 12.0


def laplacian_symbol(grid: PeriodicGrid) -> np.ndarray:
    """Per-mode value of -A^{-1} delta_x^2, that is c_l lambda_l^2 on the rfft layout."""
    s = np.sin(np.pi * rfft_modes(grid.M) / grid.M)
    lam2 = (2.0 * s / grid.h) ** 2
    return 3.0 / (3.0 - s * s) * lam2


class CompactOperator:
    """Circulant (1, 10, 1)/12 stencil with its inverse and the induced *-norm."""

    def __init__(self, grid: PeriodicGrid):
        self.grid = grid
        self._rsymbol = compact_symbol(grid.M)
        self._rsymbol.setflags(write=False)

    @property
    def symbol(self) -> np.ndarray:
        """Eigenvalue for each mode l = -M/2 .. M/2-1."""
        M = self.grid.M
        return compact_symbol(M, np.arange(-M // 2, M // 2))

    def _check(self, u: GridFunction):
        if u.grid != self.grid:
            raise GridMismatchError(f"operator built for {self.grid}, got {u.grid}")

    def apply(self, u: GridFunction) -> GridFunction:
        self._check(u)
        v = u.values
        return GridFunction(self.grid, (np.roll(v, 1) + 10.0 * v + np.roll(v, -1)) / 12.0)

    def solve(self, v: GridFunction) -> GridFunction:
        self._check(v)
        return GridFunction(self.grid, apply_symbol(v.values, 1.0 / self._rsymbol))

    def solve_values(self, values: np.ndarray) -> np.ndarray:
        return apply_symbol(values, 1.0 / self._rsymbol)

    def star_norm(self, u: GridFunction) -> float:
        """sqrt((A^{-1} u, u)) evaluated with Parseval on the spectrum."""
        self._check(u)
        # scale first so tiny or huge inputs do not under/overflow when squared
        scale = float(np.max(np.abs(u.values)))
        if scale == 0.0 or not math.isfinite(scale):
            return scale
        return scale * math.sqrt(self.star_norm_sq_values(u.values / scale))

    def star_norm_sq_values(self, values: np.ndarray) -> float:
        M = self.grid.M
        c = np.fft.rfft(values) / M
        w = np.abs(c) ** 2 / self._rsymbol
        # interior modes appear twice in the full spectrum
        w[1:M // 2] *= 2.0
        return self.grid.length * math.fsum(w)

    def star_norm_direct(self, u: GridFunction) -> float:
        """Same norm via inner(solve(u), u); kept as an independent path."""
        return math.sqrt(inner(self.solve(u), u))

    def commutes_with_diff_check(self, u: GridFunction) -> float:
        """Largest l-infinity residual of the four commutation identities with delta_x^+-."""
        self._check(u)
        h = self.grid.h
        residual = 0.0
        for diff in (_forward, _backward):
            du = GridFunction(self.grid, diff(u.values, h))
            r1 = diff(self.apply(u).values, h) - self.apply(du).values
            r2 = diff(self.solve(u).values, h) - self.solve(du).values
            residual = max(residual, float(np.max(np.abs(r1))), float(np.max(np.abs(r2))))
        return residual

    def dense(self) -> np.ndarray:
        """Dense M x M matrix of the stencil (for tests and small diagnostics)."""
        M = self.grid.M
        A = np.eye(M) * 10.0
        idx = np.arange(M)
        A[idx, (idx + 1) % M] += 1.0
        A[idx, (idx - 1) % M] += 1.0
        return A / 12.0
