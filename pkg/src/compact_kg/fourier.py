"""Discrete Fourier transforms of real grid functions.

Convention: coeff_l = (1/M) sum_j u_j exp(-2 pi i l j / M) for mode indices
l = -M/2, ..., M/2 - 1, so that u_j = sum_l coeff_l exp(2 pi i l j / M).
The heavy lifting is delegated to ``numpy.fft``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SymmetryError
from .grid import GridFunction, PeriodicGrid

HERMITIAN_TOL = 1e-10


def mode_indices(M: int) -> np.ndarray:
    """Mode numbers l = -M/2, ..., M/2 - 1 in ascending order."""
    return np.arange(-M // 2, M // 2)


def rfft_modes(M: int) -> np.ndarray:
    """Mode numbers matching the layout of ``numpy.fft.rfft`` output (0..M/2).

    The last entry is the Nyquist mode, which the ascending convention labels
    l = -M/2; its symbol only depends on |l| for every operator used here.
    """
    return np.arange(M // 2 + 1)


def wavenumbers(grid: PeriodicGrid) -> np.ndarray:
    """mu_l = 2 pi l / (b - a) on the rfft layout, Nyquist as mu = -pi M/(b - a)."""
    mu = 2.0 * np.pi * rfft_modes(grid.M) / grid.length
    mu[-1] = -np.pi * grid.M / grid.length
    return mu


@dataclass(frozen=True)
class SpectralCoefficients:
    grid: PeriodicGrid
    coeffs: np.ndarray  # ascending l = -M/2 .. M/2-1

    @property
    def modes(self) -> np.ndarray:
        return mode_indices(self.grid.M)

    def __getitem__(self, l: int) -> complex:
        M = self.grid.M
        if not -M // 2 <= l < M // 2:
            raise IndexError(f"mode {l} outside [-{M // 2}, {M // 2 - 1}]")
        return self.coeffs[l + M // 2]

    def hermitian_defect(self) -> float:
        """max |c_{-l} - conj(c_l)| including the imaginary parts of c_0 and c_{-M/2}."""
        M = self.grid.M
        c = self.coeffs
        half = M // 2
        pos = c[half + 1:]            # l = 1 .. M/2-1
        neg = c[half - 1:0:-1]        # l = -1 .. -(M/2-1)
        defect = np.max(np.abs(neg - np.conj(pos)), initial=0.0)
        return max(defect, abs(c[half].imag), abs(c[0].imag))


def dft(u: GridFunction) -> SpectralCoefficients:
    M = u.grid.M
    c = np.fft.fftshift(np.fft.fft(u.values)) / M
    return SpectralCoefficients(u.grid, c)


def inverse_dft(c: SpectralCoefficients) -> GridFunction:
    scale = max(1.0, float(np.max(np.abs(c.coeffs), initial=0.0)))
    defect = c.hermitian_defect()
    if defect > HERMITIAN_TOL * scale:
        raise SymmetryError(f"coefficients are not Hermitian (defect {defect:.3e})")
    M = c.grid.M
    values = np.fft.ifft(np.fft.ifftshift(c.coeffs)) * M
    return GridFunction(c.grid, values.real)


def naive_dft(values: np.ndarray) -> np.ndarray:
    """O(M^2) direct summation in the same convention as :func:`dft` (test oracle)."""
    values = np.asarray(values, dtype=float)
    M = values.size
    l = mode_indices(M)
    j = np.arange(M)
    kernel = np.exp(-2j * np.pi * np.outer(l, j) / M)
    return kernel @ values / M


def apply_symbol(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Multiply the rfft coefficients of ``values`` by a real even symbol."""
    M = values.size
    return np.fft.irfft(np.fft.rfft(values) * symbol, n=M)
