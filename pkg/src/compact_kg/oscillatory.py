"""Compact schemes for the oscillatory NKGE

    eps^(2p) v_ss - v_xx + v + eps^p v^(p+1) = 0,   v(x,0) = phi, v_s(x,0) = gamma/eps^p,

obtained from the standard equation by s = eps^p t. Whole-space problems are
truncated to (-4 - 1/eps, 4 + 1/eps) with periodic boundary conditions.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diagnostics import energy_values
from .compact import CompactOperator
from .errors import ConfigError
from .grid import PeriodicGrid
from .schemes import (
    NonlinearSolverConfig,
    ProblemSpec,
    RunConfig,
    SchemeState,
    Trajectory,
    _march,
    _step,
    _taylor_first_step,
    steps_for,
)


class Variant(enum.Enum):
    TORUS = "torus"
    WHOLE_SPACE = "whole-space"


def truncated_domain(epsilon: float) -> tuple[float, float]:
    half = 4.0 + 1.0 / epsilon
    return -half, half


@dataclass(frozen=True)
class OscillatoryProblemSpec(ProblemSpec):
    variant: Variant = Variant.TORUS

    def __post_init__(self):
        super().__post_init__()
        if self.variant is Variant.WHOLE_SPACE:
            a, b = truncated_domain(self.epsilon)
            if not (math.isclose(self.grid.a, a) and math.isclose(self.grid.b, b)):
                raise ConfigError(
                    f"whole-space problems live on ({a}, {b}), got ({self.grid.a}, {self.grid.b})"
                )

    @property
    def time_scale(self) -> float:
        """eps^p, the factor between s and the original time t."""
        return self.epsilon ** self.p

    @property
    def inertia(self) -> float:
        return self.epsilon ** (2 * self.p)

    def time_problem(self) -> ProblemSpec:
        """The equivalent standard problem in t = s / eps^p."""
        fields = {f.name: getattr(self, f.name) for f in dataclasses.fields(ProblemSpec)}
        return ProblemSpec(**fields)


def whole_space_problem(epsilon: float, p: int, h: float, phi, gamma, phi_xx=None,
                        label: Optional[str] = None, nonlinear: bool = True) -> OscillatoryProblemSpec:
    """Problem on the truncated domain with M = (b - a)/h rounded to an even integer."""
    a, b = truncated_domain(epsilon)
    grid = PeriodicGrid.from_mesh_size(a, b, h)
    return OscillatoryProblemSpec(grid, epsilon, p, phi, gamma, phi_xx, nonlinear, label,
                                  Variant.WHOLE_SPACE)


def _first_step_coefficients(spec, k, regularized, form):
    ep = spec.time_scale
    if not regularized:
        return k / ep, (k / ep) ** 2
    if form == "literal":
        return math.sin(k / ep), k * math.sin(k / spec.inertia)
    if form == "product":
        return math.sin(k / ep), (k / ep) * math.sin(k / ep)
    raise ConfigError(f"unknown regularization form {form!r}; expected 'literal' or 'product'")


def osc_first_step(spec: OscillatoryProblemSpec, k: float, regularized: bool = False,
                   form: str = "literal", use_discrete_laplacian: Optional[bool] = None) -> SchemeState:
    """v^1 = phi + (k/eps^p) gamma + k^2/(2 eps^(2p)) (phi'' - phi - eps^p phi^(p+1)).

    With ``regularized`` the two coefficients are replaced by sin(k/eps^p) and
    either k sin(k/eps^(2p)) (``form="literal"``) or (k/eps^p) sin(k/eps^p)
    (``form="product"``).
    """
    c1, c2 = _first_step_coefficients(spec, k, regularized, form)
    return _taylor_first_step(spec, k, c1, c2, use_discrete_laplacian)


def osc_step(state: SchemeState, spec: OscillatoryProblemSpec, kind="semi-implicit",
             solver_cfg: Optional[NonlinearSolverConfig] = None) -> SchemeState:
    return _step(state, spec, kind, solver_cfg, spec.inertia)


def osc_energy(state: SchemeState, spec: OscillatoryProblemSpec) -> float:
    """Discrete energy with the eps^(2p) ||delta_s^+ v||^2 kinetic term,
    from v^n = state.prev and v^{n+1} = state.curr."""
    return energy_values(state.prev.values, state.curr.values, state.tau, spec.grid,
                         CompactOperator(spec.grid), spec.coupling, spec.p, spec.inertia)


def osc_integrate(spec: OscillatoryProblemSpec, kind, k: float, s_final: float,
                  cfg: Optional[RunConfig] = None, regularized: bool = False,
                  form: str = "literal") -> Trajectory:
    cfg = cfg or RunConfig()
    n_steps = steps_for(s_final, k)
    state = osc_first_step(spec, k, regularized, form, cfg.use_discrete_laplacian)
    traj = _march(spec, kind, state, n_steps, spec.inertia, cfg)
    traj.metadata.update(
        variant=spec.variant.value,
        first_step="taylor" if not regularized else f"regularized-{form}",
        s_final=traj.metadata.pop("t_final"),
        k=traj.metadata.pop("dt"),
    )
    return traj


def boundary_margin(values: np.ndarray, fraction: float = 0.1) -> float:
    """max |v| over the outer ``fraction`` of the domain (both ends)."""
    M = values.size
    w = max(1, int(round(fraction * M / 2)))
    return float(max(np.max(np.abs(values[:w])), np.max(np.abs(values[-w:]))))
