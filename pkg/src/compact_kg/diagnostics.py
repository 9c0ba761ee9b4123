"""Discrete energies, the error functional and linearized stability analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .compact import CompactOperator
from .errors import GridMismatchError
from .grid import GridFunction, PeriodicGrid, _forward, same_grid
from .schemes import SchemeKind


def energy_values(prev: np.ndarray, curr: np.ndarray, dt: float, grid: PeriodicGrid,
                  op: CompactOperator, coupling: float, p: int, inertia: float = 1.0) -> float:
    h = grid.h
    dt_term = inertia * h * math.fsum(((curr - prev) / dt) ** 2)
    grad = 0.5 * (op.star_norm_sq_values(_forward(prev, h)) + op.star_norm_sq_values(_forward(curr, h)))
    mass = 0.5 * h * (math.fsum(prev * prev) + math.fsum(curr * curr))
    potential = 0.0
    if coupling:
        potential = coupling * h / (p + 2) * (
            math.fsum(np.abs(prev) ** (p + 2)) + math.fsum(np.abs(curr) ** (p + 2))
        )
    return dt_term + grad + mass + potential


def discrete_energy(prev: GridFunction, curr: GridFunction, tau: float, spec) -> float:
    """E^n built from u^n = ``prev`` and u^{n+1} = ``curr``; conserved by the implicit scheme."""
    grid = same_grid(prev, curr)
    if grid != spec.grid:
        raise GridMismatchError(f"levels live on {grid}, problem on {spec.grid}")
    return energy_values(prev.values, curr.values, tau, grid, CompactOperator(grid),
                         spec.coupling, spec.p)


def error_functional(numeric: GridFunction, reference: GridFunction) -> float:
    """sqrt(||e||_l2^2 + ||delta_x^+ e||_l2^2) with e = reference - numeric."""
    grid = same_grid(numeric, reference)
    e = reference.values - numeric.values
    scale = float(np.max(np.abs(e)))
    if scale == 0.0:
        return 0.0
    # scaled so that tiny differences do not underflow when squared
    e = e / scale
    de = _forward(e, grid.h)
    return scale * math.sqrt(grid.h * (math.fsum(e * e) + math.fsum(de * de)))


def continuous_energy(spec, quad_points: int = 4096) -> float:
    """Continuous energy E(0) of the initial data by the periodic trapezoidal rule.

    The trapezoidal rule is spectrally accurate for smooth periodic integrands,
    with phi' taken by Fourier differentiation on the fine quadrature grid.
    """
    a, b = spec.grid.a, spec.grid.b
    x = a + (b - a) * np.arange(quad_points) / quad_points
    phi = np.asarray(spec.phi(x), dtype=float) * np.ones_like(x)
    gamma = np.asarray(spec.gamma(x), dtype=float) * np.ones_like(x)
    mu = 2.0 * np.pi * np.fft.rfftfreq(quad_points, d=(b - a) / quad_points)
    dphi = np.fft.irfft(1j * mu * np.fft.rfft(phi), n=quad_points)
    density = gamma ** 2 + dphi ** 2 + phi ** 2 + 2.0 * spec.coupling / (spec.p + 2) * np.abs(phi) ** (spec.p + 2)
    return (b - a) / quad_points * math.fsum(density)


@dataclass
class StabilityReport:
    modes: np.ndarray
    lam: np.ndarray
    c: np.ndarray
    theta: np.ndarray
    xi_abs: np.ndarray
    unconditionally_stable: bool
    condition_bound: Optional[float]
    stable: bool
    kind: SchemeKind

    def rows(self):
        for l, lam, c, th, xi in zip(self.modes, self.lam, self.c, self.theta, self.xi_abs):
            yield int(l), float(lam), float(c), float(th), float(xi)


def amplification_moduli(theta: np.ndarray) -> np.ndarray:
    """Largest |xi| among the roots of xi^2 - 2 theta xi + 1 = 0."""
    theta = np.asarray(theta, dtype=float)
    disc = theta * theta - 1.0
    real_roots = np.abs(theta) + np.sqrt(np.maximum(disc, 0.0))
    return np.where(disc > 0.0, real_roots, 1.0)


def mode_factors(grid: PeriodicGrid):
    modes = np.arange(-grid.M // 2, grid.M // 2)
    s = np.sin(np.pi * modes / grid.M)
    lam = 2.0 / grid.h * s
    c = 3.0 / (3.0 - s * s)
    return modes, lam, c


def stability_report(spec, kind, tau: float, sigma_max: float) -> StabilityReport:
    """Frozen-coefficient von Neumann analysis with f(u) = eps^p sigma_max u.

    This certifies linearized stability only.
    """
    kind = SchemeKind.parse(kind)
    return _report(spec.grid, spec.coupling, kind, tau, sigma_max, time_unit=1.0)


def osc_stability_report(spec, kind, k: float, sigma_max: float) -> StabilityReport:
    """Same analysis for the oscillatory schemes; the bound is returned in units of k."""
    kind = SchemeKind.parse(kind)
    scale = spec.epsilon ** spec.p
    return _report(spec.grid, spec.coupling, kind, k / scale, sigma_max, time_unit=scale)


def _report(grid, coupling, kind, tau, sigma_max, time_unit) -> StabilityReport:
    modes, lam, c = mode_factors(grid)
    es = coupling * sigma_max
    t2 = tau * tau
    bound = None
    if kind is SchemeKind.IMPLICIT:
        theta = 2.0 / (2.0 + t2 * (1.0 + es + c * lam * lam))
        unconditional = True
    else:
        theta = (2.0 - t2 * es) / (2.0 + t2 * (1.0 + c * lam * lam))
        unconditional = es <= 1.0
        if not unconditional:
            bound = time_unit * 2.0 / math.sqrt(es - 1.0)
    stable = bool(np.max(np.abs(theta)) <= 1.0)
    return StabilityReport(modes, lam, c, theta, amplification_moduli(theta),
                           unconditional, bound, stable, kind)


def sigma_max_of(trajectory) -> float:
    """Running max of ||u^n||_inf^p captured during integration."""
    return trajectory.sigma_max


def sigma_max_from_levels(levels, p: int) -> float:
    return max((float(np.max(np.abs(u.values))) ** p for u in levels), default=0.0)


@dataclass(frozen=True)
class ErrorRecord:
    h: float
    tau: float
    epsilon: float
    p: int
    t_eval: float
    e_value: float
    scheme: str
    reference: str
