"""Implicit and semi-implicit fourth-order compact schemes for the 1D NKGE

    u_tt - u_xx + u + eps^p u^(p+1) = 0,   periodic in x.

Both schemes share the linear part

    (m/dt^2)(u^{n+1} - 2u^n + u^{n-1}) + L (u^{n+1} + u^{n-1})/2 + eps^p N = 0,
    L = -A^{-1} delta_x^2 + I,

with m = 1 for the standard equation (the oscillatory module uses
m = eps^(2p)). The implicit scheme takes N = G(u^{n+1}, u^{n-1}), the
semi-implicit one N = (u^n)^(p+1). L is diagonal in Fourier space, so the
linear solve is a per-mode division.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .compact import CompactOperator, laplacian_symbol
from .errors import BlowUpError, ConfigError, NonlinearSolveError, NumericalError
from .grid import GridFunction, PeriodicGrid

log = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e12


class SchemeKind(enum.Enum):
    IMPLICIT = "implicit"
    SEMI_IMPLICIT = "semi-implicit"

    @classmethod
    def parse(cls, text) -> "SchemeKind":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", "-")
        for kind in cls:
            if key == kind.value or key == kind.value.replace("-", ""):
                return kind
        raise ConfigError(f"unknown scheme {text!r}; expected 'implicit' or 'semi-implicit'")


@dataclass(frozen=True)
class ProblemSpec:
    """Grid, nonlinearity strength and initial data of one NKGE problem.

    ``nonlinear=False`` drops the eps^p u^(p+1) term (used for linear checks).
    ``label`` identifies the initial data for reference caching.
    """

    grid: PeriodicGrid
    epsilon: float
    p: int
    phi: Callable
    gamma: Callable
    phi_xx: Optional[Callable] = None
    nonlinear: bool = True
    label: Optional[str] = None

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if int(self.p) != self.p or self.p < 1:
            raise ConfigError(f"p must be a positive integer, got {self.p}")
        object.__setattr__(self, "p", int(self.p))

    @property
    def coupling(self) -> float:
        """Coefficient of the nonlinear term, eps^p (0 when linear)."""
        return self.epsilon ** self.p if self.nonlinear else 0.0

    def with_grid(self, grid: PeriodicGrid):
        return dataclasses.replace(self, grid=grid)

    def initial_values(self):
        x = self.grid.x
        phi = np.asarray(self.phi(x), dtype=float) * np.ones_like(x)
        gamma = np.asarray(self.gamma(x), dtype=float) * np.ones_like(x)
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(gamma))):
            raise ConfigError("initial data is not finite at the grid nodes")
        return phi, gamma


@dataclass(frozen=True)
class NonlinearSolverConfig:
    tol: float = 1e-13
    max_iters: int = 200


@dataclass
class SchemeState:
    prev: GridFunction
    curr: GridFunction
    n: int
    tau: float
    sigma_max_running: float

    @property
    def t(self) -> float:
        return self.n * self.tau


def g_quotient(v, w, p: int):
    """(F(v) - F(w))/(v - w) with F(v) = v^(p+2)/(p+2), in the symmetric polynomial form.

    Uses S_k = v^k + w S_{k-1}, S_0 = 1, so that S_{p+1} = sum_i v^i w^(p+1-i).
    Works elementwise on arrays.
    """
    vk = 1.0
    s = 1.0
    for _ in range(p + 1):
        vk = vk * v
        s = vk + w * s
    return s / (p + 2)


def sigma_of(values: np.ndarray, p: int) -> float:
    return float(np.max(np.abs(values))) ** p


class _Kernel:
    """Per-mode linear solve and one-step update on raw value arrays."""

    def __init__(self, grid: PeriodicGrid, dt: float, inertia: float, coupling: float,
                 p: int, kind: SchemeKind, solver: NonlinearSolverConfig):
        if not dt > 0:
            raise ConfigError(f"time step must be positive, got {dt}")
        self.M = grid.M
        self.a = inertia / (dt * dt)
        self.denom = self.a + 0.5 * (laplacian_symbol(grid) + 1.0)
        self.coupling = coupling
        self.p = p
        self.kind = kind
        self.solver = solver
        self.last_iterations = 0

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        return np.fft.irfft(np.fft.rfft(rhs) / self.denom, n=self.M)

    def advance(self, prev: np.ndarray, curr: np.ndarray) -> np.ndarray:
        p, c = self.p, self.coupling
        if self.kind is SchemeKind.SEMI_IMPLICIT:
            rhs = 2.0 * self.a * curr
            if c:
                rhs = rhs - c * curr ** (p + 1)
            return self._solve(rhs) - prev

        linear = self._solve(2.0 * self.a * curr) - prev
        if not c:
            return linear
        tol, max_iters = self.solver.tol, self.solver.max_iters
        u = 2.0 * curr - prev
        delta = math.inf
        for it in range(1, max_iters + 1):
            u_new = linear - self._solve(c * g_quotient(u, prev, p))
            delta = float(np.max(np.abs(u_new - u)))
            u = u_new
            if not math.isfinite(delta):
                break
            if delta <= tol * max(1.0, float(np.max(np.abs(u)))):
                self.last_iterations = it
                return u
        if not math.isfinite(delta):
            raise BlowUpError("non-finite values in fixed-point iteration")
        raise NonlinearSolveError(max_iters, delta)


def _check_finite(values: np.ndarray, step: int) -> float:
    m = float(np.max(np.abs(values)))
    if not m <= BLOWUP_THRESHOLD:
        raise BlowUpError(f"solution blew up (max |u| = {m:.3e})", step=step)
    return m


def first_step(spec: ProblemSpec, tau: float, use_discrete_laplacian: Optional[bool] = None) -> SchemeState:
    """u^0 = phi and the Taylor step
    u^1 = phi + tau gamma + tau^2/2 (phi'' - phi - eps^p phi^(p+1)).

    ``use_discrete_laplacian=None`` picks the analytic phi'' when the spec has
    one and A^{-1} delta_x^2 phi otherwise.
    """
    return _taylor_first_step(spec, tau, tau, tau * tau, use_discrete_laplacian)


def _phi_second_derivative(spec: ProblemSpec, phi: np.ndarray, use_discrete):
    if use_discrete is None:
        use_discrete = spec.phi_xx is None
    if not use_discrete:
        if spec.phi_xx is None:
            raise ConfigError("analytic phi'' requested but the problem has no phi_xx")
        return np.asarray(spec.phi_xx(spec.grid.x), dtype=float) * np.ones(spec.grid.M), False
    h = spec.grid.h
    d2 = (np.roll(phi, -1) - 2.0 * phi + np.roll(phi, 1)) / (h * h)
    return CompactOperator(spec.grid).solve_values(d2), True


def _taylor_first_step(spec, dt, c1, c2, use_discrete) -> SchemeState:
    if not dt > 0:
        raise ConfigError(f"time step must be positive, got {dt}")
    phi, gamma = spec.initial_values()
    phi_xx, _ = _phi_second_derivative(spec, phi, use_discrete)
    u1 = phi + c1 * gamma + 0.5 * c2 * (phi_xx - phi - spec.coupling * phi ** (spec.p + 1))
    _check_finite(u1, 1)
    sigma = max(sigma_of(phi, spec.p), sigma_of(u1, spec.p))
    return SchemeState(GridFunction(spec.grid, phi), GridFunction(spec.grid, u1), 1, dt, sigma)


def _step(state: SchemeState, spec, kind, solver_cfg, inertia) -> SchemeState:
    if state.n < 1:
        raise ConfigError("state must hold two initialized levels (n >= 1)")
    kind = SchemeKind.parse(kind)
    kernel = _Kernel(spec.grid, state.tau, inertia, spec.coupling, spec.p, kind,
                     solver_cfg or NonlinearSolverConfig())
    try:
        new = kernel.advance(state.prev.values, state.curr.values)
    except NumericalError as exc:
        exc.step = state.n + 1
        raise
    m = _check_finite(new, state.n + 1)
    sigma = max(state.sigma_max_running, m ** spec.p)
    return SchemeState(state.curr, GridFunction(spec.grid, new), state.n + 1, state.tau, sigma)


def step(state: SchemeState, spec: ProblemSpec, kind=SchemeKind.SEMI_IMPLICIT,
         solver_cfg: Optional[NonlinearSolverConfig] = None) -> SchemeState:
    """Advance (u^{n-1}, u^n) to (u^n, u^{n+1})."""
    return _step(state, spec, kind, solver_cfg, 1.0)


def steps_for(t_final: float, dt: float, rtol: float = 1e-9) -> int:
    """Number of steps of size dt reaching t_final; raise unless it is integral."""
    if not t_final > 0 or not dt > 0:
        raise ConfigError(f"need t_final > 0 and dt > 0, got {t_final}, {dt}")
    n = round(t_final / dt)
    if n < 1 or abs(n * dt - t_final) > rtol * t_final:
        raise ConfigError(f"t_final={t_final} is not an integer multiple of dt={dt}")
    return int(n)


def fit_step(t_final: float, dt: float, rtol: float = 1e-9) -> tuple[int, float]:
    """Shrink dt (if needed) so that it divides t_final exactly."""
    if not t_final > 0 or not dt > 0:
        raise ConfigError(f"need t_final > 0 and dt > 0, got {t_final}, {dt}")
    n = round(t_final / dt)
    if n < 1 or abs(n * dt - t_final) > rtol * t_final:
        n = math.ceil(t_final / dt)
    return int(n), t_final / n


@dataclass
class RunConfig:
    """Options for :func:`integrate`.

    ``energy_every`` of None means every step for the implicit scheme and
    every 100 steps for the semi-implicit one; 0 disables the energy series.
    """

    snapshot_times: tuple = ()
    energy_every: Optional[int] = None
    store_levels: bool = False
    use_discrete_laplacian: Optional[bool] = None
    solver: NonlinearSolverConfig = field(default_factory=NonlinearSolverConfig)
    probe_index: Optional[int] = None


@dataclass
class Trajectory:
    final: SchemeState
    snapshots: dict
    energy: list
    sigma_max: float
    metadata: dict
    levels: Optional[list] = None
    probe: Optional[list] = None


def integrate(spec: ProblemSpec, kind, tau: float, t_final: float,
              cfg: Optional[RunConfig] = None) -> Trajectory:
    """First step plus repeated steps up to t_final = N tau."""
    cfg = cfg or RunConfig()
    n_steps = steps_for(t_final, tau)
    state = _taylor_first_step(spec, tau, tau, tau * tau, cfg.use_discrete_laplacian)
    return _march(spec, kind, state, n_steps, 1.0, cfg)


def _energy_fn(spec, dt, inertia):
    from .diagnostics import energy_values

    op = CompactOperator(spec.grid)

    def energy(prev, curr):
        return energy_values(prev, curr, dt, spec.grid, op, spec.coupling, spec.p, inertia)

    return energy


def _march(spec, kind, state: SchemeState, n_steps: int, inertia: float,
           cfg: RunConfig) -> Trajectory:
    kind = SchemeKind.parse(kind)
    dt = state.tau
    kernel = _Kernel(spec.grid, dt, inertia, spec.coupling, spec.p, kind, cfg.solver)
    every = cfg.energy_every
    if every is None:
        every = 1 if kind is SchemeKind.IMPLICIT else 100
    energy = _energy_fn(spec, dt, inertia) if every else None

    snap_steps = {}
    for t in cfg.snapshot_times:
        snap_steps[steps_for(t, dt) if t > 0 else 0] = t
    snapshots = {}
    levels = [state.prev, state.curr] if cfg.store_levels else None
    probe = None
    if cfg.probe_index is not None:
        j = cfg.probe_index
        probe = [(0.0, float(state.prev.values[j])), (dt, float(state.curr.values[j]))]

    prev, curr = state.prev.values, state.curr.values
    sigma = state.sigma_max_running
    series = []
    for n, arr in ((0, prev), (1, curr)):
        if n in snap_steps:
            snapshots[snap_steps[n]] = GridFunction(spec.grid, arr)
    if energy is not None:
        series.append((0, 0.0, energy(prev, curr)))

    p = spec.p
    n = 1
    max_iters = 0
    while n < n_steps:
        try:
            new = kernel.advance(prev, curr)
        except NumericalError as exc:
            exc.step = n + 1
            raise
        max_iters = max(max_iters, kernel.last_iterations)
        m = _check_finite(new, n + 1)
        s = m ** p
        if s > sigma:
            sigma = s
        prev, curr = curr, new
        n += 1
        if levels is not None:
            levels.append(GridFunction(spec.grid, curr))
        if probe is not None:
            probe.append((n * dt, float(curr[cfg.probe_index])))
        if n in snap_steps:
            snapshots[snap_steps[n]] = GridFunction(spec.grid, curr)
        if energy is not None and (n - 1) % every == 0:
            series.append((n - 1, (n - 1) * dt, energy(prev, curr)))

    final = SchemeState(GridFunction(spec.grid, prev), GridFunction(spec.grid, curr), n, dt, sigma)
    meta = {
        "scheme": kind.value,
        "M": spec.grid.M,
        "h": spec.grid.h,
        "a": spec.grid.a,
        "b": spec.grid.b,
        "dt": dt,
        "steps": n,
        "t_final": n * dt,
        "epsilon": spec.epsilon,
        "p": p,
        "phi_xx": _phi_source(spec, cfg.use_discrete_laplacian),
        "sigma_max": sigma,
    }
    if kind is SchemeKind.IMPLICIT:
        meta["max_fixed_point_iterations"] = max_iters
    log.debug("run finished: %s", meta)
    return Trajectory(final, snapshots, series, sigma, meta, levels, probe)


def _phi_source(spec, use_discrete):
    if use_discrete is None:
        use_discrete = spec.phi_xx is None
    return "discrete" if use_discrete else "analytic"
