"""Exponential wave integrator Fourier pseudospectral (EWI-FP) reference solver.

Gautschi-type filtered two-step recurrence for u_tt + (1 - d_xx) u + f(u) = 0,
per Fourier mode with omega_l = sqrt(1 + mu_l^2):

    u^{n+1} = 2 cos(omega tau) u^n - u^{n-1} - tau^2 sinc^2(omega tau/2) f^n,
    u^1     = cos(omega tau) u^0 + sin(omega tau)/omega gamma
              - tau^2/2 sinc^2(omega tau/2) f^0,

where f = eps^p u^(p+1) is evaluated pointwise in physical space. The
recurrence is exact for the linear equation.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .fourier import SpectralCoefficients, wavenumbers
from .grid import GridFunction, PeriodicGrid
from .schemes import ProblemSpec, _check_finite, steps_for

log = logging.getLogger(__name__)

CACHE_ENV = "COMPACT_KG_CACHE"


def _sinc(z):
    return np.sinc(z / np.pi)


@dataclass
class EwiState:
    """Two spectral levels of the EWI recurrence.

    ``curr_hat``/``prev_hat`` hold unnormalized ``numpy.fft.rfft`` coefficients
    (modes 0..M/2); the negative modes follow from Hermitian symmetry.
    """

    spec: ProblemSpec
    curr_hat: np.ndarray
    prev_hat: np.ndarray
    omega: np.ndarray
    n: int
    tau_e: float

    @property
    def grid(self) -> PeriodicGrid:
        return self.spec.grid

    def values(self, which: str = "curr") -> GridFunction:
        c = self.curr_hat if which == "curr" else self.prev_hat
        return GridFunction(self.grid, np.fft.irfft(c, n=self.grid.M))

    def coefficients(self, which: str = "curr") -> SpectralCoefficients:
        """Full spectrum l = -M/2..M/2-1 in the 1/M-normalized convention."""
        M = self.grid.M
        c = self.curr_hat if which == "curr" else self.prev_hat
        full = np.empty(M, dtype=complex)
        half = M // 2
        full[half:] = c[:half]                    # l = 0..M/2-1
        full[:half] = np.conj(c[half:0:-1])       # l = -M/2..-1
        full[0] = c[half].real                    # Nyquist kept real
        return SpectralCoefficients(self.grid, full / M)


def omega_of(grid: PeriodicGrid) -> np.ndarray:
    return np.sqrt(1.0 + wavenumbers(grid) ** 2)


def _nonlinear_hat(spec: ProblemSpec, u: np.ndarray) -> np.ndarray:
    c = spec.coupling
    if not c:
        return np.zeros(spec.grid.M // 2 + 1, dtype=complex)
    return np.fft.rfft(c * u ** (spec.p + 1))


def ewi_init(spec: ProblemSpec, tau_e: float) -> EwiState:
    if not tau_e > 0:
        raise ConfigError(f"tau_e must be positive, got {tau_e}")
    phi, gamma = spec.initial_values()
    omega = omega_of(spec.grid)
    u0 = np.fft.rfft(phi)
    g0 = np.fft.rfft(gamma)
    wt = omega * tau_e
    filt = _sinc(0.5 * wt) ** 2
    u1 = np.cos(wt) * u0 + np.sin(wt) / omega * g0 - 0.5 * tau_e ** 2 * filt * _nonlinear_hat(spec, phi)
    return EwiState(spec, u1, u0, omega, 1, tau_e)


class _EwiKernel:
    def __init__(self, spec: ProblemSpec, omega: np.ndarray, tau_e: float):
        wt = omega * tau_e
        self.two_cos = 2.0 * np.cos(wt)
        self.forcing = tau_e ** 2 * _sinc(0.5 * wt) ** 2
        self.coupling = spec.coupling
        self.p = spec.p
        self.M = spec.grid.M

    def advance(self, prev_hat, curr_hat, step):
        new = self.two_cos * curr_hat - prev_hat
        if self.coupling:
            u = np.fft.irfft(curr_hat, n=self.M)
            _check_finite(u, step)
            new = new - self.forcing * np.fft.rfft(self.coupling * u ** (self.p + 1))
        return new


def ewi_step(state: EwiState, spec: Optional[ProblemSpec] = None) -> EwiState:
    spec = spec or state.spec
    kernel = _EwiKernel(spec, state.omega, state.tau_e)
    new = kernel.advance(state.prev_hat, state.curr_hat, state.n + 1)
    _check_finite(np.fft.irfft(new, n=spec.grid.M), state.n + 1)
    return EwiState(spec, new, state.curr_hat, state.omega, state.n + 1, state.tau_e)


def ewi_integrate(spec: ProblemSpec, tau_e: float, t_final: float, probe_index=None):
    """March to t_final; returns (final GridFunction, probe series or None)."""
    n_steps = steps_for(t_final, tau_e)
    state = ewi_init(spec, tau_e)
    if n_steps == 1:
        return state.values(), None
    kernel = _EwiKernel(spec, state.omega, tau_e)
    prev, curr = state.prev_hat, state.curr_hat
    M = spec.grid.M
    probe = None
    if probe_index is not None:
        probe = [(0.0, float(np.fft.irfft(prev, n=M)[probe_index])),
                 (tau_e, float(np.fft.irfft(curr, n=M)[probe_index]))]
    for n in range(2, n_steps + 1):
        prev, curr = curr, kernel.advance(prev, curr, n)
        if probe is not None:
            probe.append((n * tau_e, float(np.fft.irfft(curr, n=M)[probe_index])))
    u = np.fft.irfft(curr, n=M)
    _check_finite(u, n_steps)
    return GridFunction(spec.grid, u), probe


def reference_grid(spec: ProblemSpec, h_e: float) -> PeriodicGrid:
    return PeriodicGrid.from_mesh_size(spec.grid.a, spec.grid.b, h_e)


def reference_solution(spec: ProblemSpec, t_final: float, h_e: float, tau_e: float,
                       target: Optional[PeriodicGrid] = None,
                       cache: Optional["ReferenceCache"] = None) -> GridFunction:
    """Fine-grid EWI-FP solution at t_final, injected onto ``target`` if given.

    ``target`` defaults to the spec's grid. Its nodes must be a subset of the
    reference grid's nodes.
    """
    fine = reference_grid(spec, h_e)
    target = spec.grid if target is None else target
    if not fine.is_refinement_of(target):
        raise ConfigError(
            f"grid M={target.M} does not nest in the reference grid M={fine.M}"
        )
    fine_spec = spec.with_grid(fine)
    key = None
    if cache is not None:
        key = cache.key(fine_spec, t_final, tau_e)
        hit = cache.load(key, fine)
        if hit is not None:
            return hit.restrict(target)
    n_steps = steps_for(t_final, tau_e)
    log.info("EWI reference: M=%d, tau_e=%.3g, %d steps", fine.M, tau_e, n_steps)
    u, _ = ewi_integrate(fine_spec, tau_e, t_final)
    if cache is not None and key is not None:
        cache.store(key, u, _params(fine_spec, t_final, tau_e))
    return u.restrict(target)


def _params(spec: ProblemSpec, t_final, tau_e) -> dict:
    return {
        "label": spec.label,
        "a": repr(spec.grid.a),
        "b": repr(spec.grid.b),
        "M": spec.grid.M,
        "epsilon": repr(spec.epsilon),
        "p": spec.p,
        "nonlinear": spec.nonlinear,
        "t_final": repr(t_final),
        "tau_e": repr(tau_e),
    }


class ReferenceCache:
    """Reference solutions stored as CSV (x, u) files keyed by a parameter hash.

    Problems without a ``label`` are never cached since their initial data
    cannot be identified.
    """

    def __init__(self, directory):
        self.directory = Path(directory)

    @classmethod
    def from_env(cls) -> Optional["ReferenceCache"]:
        d = os.environ.get(CACHE_ENV)
        return cls(d) if d else None

    def key(self, spec: ProblemSpec, t_final, tau_e) -> Optional[str]:
        if spec.label is None:
            return None
        blob = json.dumps(_params(spec, t_final, tau_e), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:24]

    def _path(self, key):
        return self.directory / f"ref_{key}.csv"

    def load(self, key, grid: PeriodicGrid) -> Optional[GridFunction]:
        if key is None:
            return None
        path = self._path(key)
        if not path.exists():
            return None
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        values = [float(r[1]) for r in rows[1:]]
        if len(values) != grid.M:
            log.warning("ignoring malformed cache entry %s", path)
            return None
        return GridFunction(grid, values)

    def store(self, key, u: GridFunction, params: dict):
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(key)
        tmp = path.with_suffix(".tmp")
        with tmp.open("w", newline="") as fh:
            fh.write("# " + json.dumps(params, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["x", "u"])
            for x, v in zip(u.grid.x, u.values):
                w.writerow([repr(float(x)), repr(float(v))])
        tmp.replace(path)
