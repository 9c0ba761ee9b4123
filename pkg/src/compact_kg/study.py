"""Convergence studies: parameter sweeps in h or in the time step, error tables
with observed orders, and the presets reproducing the published tables."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diagnostics import error_functional
from .errors import ConfigError, KGError
from .ewi import ReferenceCache, _params, ewi_integrate
from .grid import GridFunction, PeriodicGrid
from .oscillatory import (
    OscillatoryProblemSpec,
    Variant,
    boundary_margin,
    osc_integrate,
    truncated_domain,
)
from .problems import DATA
from .schemes import ProblemSpec, RunConfig, SchemeKind, fit_step, integrate

log = logging.getLogger(__name__)

AXES = ("spatial", "temporal")
SCHEMES = ("semi-implicit", "implicit", "reference")
EQUATIONS = ("standard", "oscillatory")
DOMAINS = ("torus", "whole-space")
FIRST_STEPS = ("auto", "analytic", "discrete")


def observed_order(e_coarse: float, e_fine: float) -> float:
    """log2(e_coarse / e_fine) for one halving of the resolution."""
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError(f"errors must be positive, got {e_coarse}, {e_fine}")
    return math.log2(e_coarse / e_fine)


@dataclass(frozen=True)
class StudyPlan:
    """One convergence table.

    Time quantities (``dt``, ``dt0``, ``ref_dt``, ``t_final``) are in the
    time variable of the equation: t for ``standard``, s for ``oscillatory``.
    ``t_final=None`` means t = 1/eps^p. In spatial studies the fixed step is
    ``dt * eps**dt_eps_exponent``.
    """

    axis: str
    scheme: str
    p: int
    epsilons: tuple
    epsilon_labels: tuple = ()
    name: str = "custom"
    equation: str = "standard"
    domain: str = "torus"
    data: str = "trig"
    a: float = 0.0
    b: float = 2.0 * math.pi
    h0: float = math.pi / 8
    h: float = math.pi / 256
    dt0: float = 0.1
    dt: float = 2e-5
    dt_eps_exponent: float = 0.0
    halvings: int = 4
    t_final: Optional[float] = None
    ref_h: Optional[float] = None
    ref_dt: Optional[float] = None
    diagonal_offset: Optional[int] = None
    diagonal_exponent: Optional[float] = None
    first_step: str = "auto"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.equation not in EQUATIONS:
            raise ConfigError(f"equation must be one of {EQUATIONS}, got {self.equation!r}")
        if self.domain not in DOMAINS:
            raise ConfigError(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        if self.data not in DATA:
            raise ConfigError(f"data must be one of {tuple(DATA)}, got {self.data!r}")
        if self.first_step not in FIRST_STEPS:
            raise ConfigError(f"first_step must be one of {FIRST_STEPS}, got {self.first_step!r}")
        if int(self.p) != self.p or self.p < 1:
            raise ConfigError(f"p must be a positive integer, got {self.p}")
        if self.halvings < 2:
            raise ConfigError("halvings must be >= 2 so that orders can be compared")
        if not self.epsilons:
            raise ConfigError("epsilon list is empty")
        for e in self.epsilons:
            if not 0 < e <= 1:
                raise ConfigError(f"epsilon must lie in (0, 1], got {e}")
        if not self.epsilon_labels:
            object.__setattr__(self, "epsilon_labels", tuple(f"{e:g}" for e in self.epsilons))
        if len(self.epsilon_labels) != len(self.epsilons):
            raise ConfigError("epsilon labels do not match the epsilon list")
        for name in ("h0", "h", "dt0", "dt"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.t_final is not None and not self.t_final > 0:
            raise ConfigError("t_final must be positive")
        if self.axis == "temporal":
            ref_dt = self.reference_dt(1.0)
            if ref_dt > self.dt0 / 2 ** self.halvings / 4:
                raise ConfigError(
                    f"ref_dt={ref_dt} must be at least 4x finer than the finest step "
                    f"{self.dt0 / 2 ** self.halvings}"
                )
        elif self.ref_h is not None and self.ref_h > self.finest_h_estimate() / 4 * (1 + 1e-12):
            raise ConfigError(
                f"ref_h={self.ref_h} must be at least 4x finer than the finest mesh "
                f"{self.finest_h_estimate()}"
            )

    # -- derived quantities -------------------------------------------------

    def columns(self) -> int:
        return self.halvings + 1

    def finest_h_estimate(self) -> float:
        return self.h0 / 2 ** self.halvings

    def time_scale(self, eps: float) -> float:
        return eps ** self.p if self.equation == "oscillatory" else 1.0

    def final_time(self, eps: float) -> float:
        if self.t_final is not None:
            return self.t_final
        return eps ** (-self.p)

    def domain_for(self, eps: float) -> tuple[float, float]:
        if self.domain == "whole-space":
            return truncated_domain(eps)
        return self.a, self.b

    def study_grids(self, eps: float) -> list:
        a, b = self.domain_for(eps)
        if self.axis == "temporal":
            return [PeriodicGrid.from_mesh_size(a, b, self.h)] * self.columns()
        M0 = PeriodicGrid.from_mesh_size(a, b, self.h0).M
        return [PeriodicGrid(a, b, M0 * 2 ** i) for i in range(self.columns())]

    def reference_grid(self, eps: float) -> PeriodicGrid:
        finest = self.study_grids(eps)[-1]
        if self.axis == "temporal":
            return finest
        target = self.ref_h if self.ref_h is not None else finest.h / 4
        ratio = max(4, 2 ** math.ceil(math.log2(finest.h / target) - 1e-9))
        return PeriodicGrid(finest.a, finest.b, finest.M * ratio)

    def study_steps(self, eps: float) -> list:
        if self.axis == "spatial":
            return [self.dt * eps ** self.dt_eps_exponent] * self.columns()
        return [self.dt0 / 2 ** i for i in range(self.columns())]

    def reference_dt(self, eps: float) -> float:
        if self.ref_dt is not None:
            return self.ref_dt
        if self.axis == "spatial":
            return self.study_steps(eps)[0]
        return self.dt0 / 2 ** self.halvings / 32

    def diagonal_column(self, eps: float) -> float:
        """Column where the resolution matches the eps-scalability h ~ eps^(p/4),
        tau ~ eps^(p/2) or k ~ eps^(3p/2)."""
        offset = self.diagonal_offset
        if offset is None:
            offset = 1 if self.axis == "spatial" else 0
        exponent = self.diagonal_exponent
        if exponent is None:
            if self.axis == "spatial":
                exponent = self.p / 4
            elif self.equation == "oscillatory":
                exponent = 1.5 * self.p
            else:
                exponent = self.p / 2
        return offset + exponent * math.log2(1.0 / eps)

    def metadata(self) -> dict:
        meta = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        meta["epsilons"] = ",".join(repr(e) for e in self.epsilons)
        meta["epsilon_labels"] = ",".join(self.epsilon_labels)
        meta["t_final"] = "1/eps^p" if self.t_final is None else self.t_final
        for key in ("ref_h", "ref_dt", "diagonal_offset", "diagonal_exponent"):
            if meta[key] is None:
                meta[key] = "auto"
        return meta

    # -- problem construction -----------------------------------------------

    def problem(self, eps: float, grid: PeriodicGrid):
        phi, gamma, phi_xx = DATA[self.data]
        label = f"{self.data}:{self.domain}"
        if self.equation == "oscillatory":
            variant = Variant.WHOLE_SPACE if self.domain == "whole-space" else Variant.TORUS
            return OscillatoryProblemSpec(grid, eps, self.p, phi, gamma, phi_xx, True, label, variant)
        return ProblemSpec(grid, eps, self.p, phi, gamma, phi_xx, True, label)

    def discrete_first_step(self) -> Optional[bool]:
        return {"auto": None, "analytic": False, "discrete": True}[self.first_step]


# -- presets ---------------------------------------------------------------

TABLE1_FULL = (("1", 1.0), ("1/4", 0.25), ("1/16", 1 / 16), ("1/64", 1 / 64))
TABLE2_FULL = (("1", 1.0), ("1/2", 0.5), ("1/4", 0.25), ("1/8", 0.125), ("1/16", 1 / 16))
TABLE3_FULL = (("1", 1.0), ("2^-4", 2.0 ** -4), ("2^-8", 2.0 ** -8))
TABLE4_FULL = tuple((f"2^(-{2 * i}/3)" if i else "1", 2.0 ** (-2 * i / 3)) for i in range(5))


def _eps(pairs):
    return {"epsilon_labels": tuple(l for l, _ in pairs), "epsilons": tuple(e for _, e in pairs)}


def preset(name: str, full: bool = False) -> dict:
    """Keyword arguments of a named :class:`StudyPlan`.

    Desk-scale presets cover the smaller-cost epsilon rows; ``full`` restores
    the published epsilon range and reference steps (hours of CPU time).
    """
    if name == "table1":
        eps = TABLE1_FULL if full else TABLE1_FULL[:2]
        return dict(name=name, axis="spatial", scheme="semi-implicit", p=2, equation="standard",
                    domain="torus", data="trig", h0=math.pi / 8, halvings=4, dt=2e-5,
                    ref_h=math.pi / 512, ref_dt=2e-5, diagonal_offset=1, **_eps(eps))
    if name == "table2":
        eps = TABLE2_FULL if full else TABLE2_FULL[:3]
        return dict(name=name, axis="temporal", scheme="semi-implicit", p=2, equation="standard",
                    domain="torus", data="trig", h=math.pi / 256, dt0=0.1, halvings=5,
                    ref_dt=2e-5 if full else 1e-4, diagonal_offset=0, **_eps(eps))
    if name == "table3":
        eps = TABLE3_FULL if full else (("1", 1.0), ("2^-2", 0.25), ("2^-4", 2.0 ** -4))
        return dict(name=name, axis="spatial", scheme="semi-implicit", p=1, equation="oscillatory",
                    domain="whole-space", data="gaussian", h0=0.5, halvings=3, dt=1e-4,
                    dt_eps_exponent=2.0 / 3.0, t_final=1.0, ref_h=1 / 64, ref_dt=1e-5,
                    diagonal_offset=1, **_eps(eps))
    if name == "table4":
        eps = TABLE4_FULL if full else TABLE4_FULL[:3]
        return dict(name=name, axis="temporal", scheme="semi-implicit", p=1, equation="oscillatory",
                    domain="whole-space", data="gaussian", h=1 / 64, dt0=0.1, halvings=5,
                    t_final=1.0, ref_dt=1e-5, diagonal_offset=0, **_eps(eps))
    raise ConfigError(f"unknown preset {name!r}; expected table1..table4")


PRESETS = ("table1", "table2", "table3", "table4")


def preset_plan(name: str, full: bool = False, **overrides) -> StudyPlan:
    kw = preset(name, full)
    kw.update(overrides)
    return StudyPlan(**kw)


# -- running ---------------------------------------------------------------

@dataclass
class TableRow:
    epsilon: float
    epsilon_label: str
    column: int
    resolution: float
    e_value: Optional[float]
    order: Optional[float] = None
    status: str = "ok"


@dataclass
class ConvergenceTable:
    plan: StudyPlan
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def row(self, eps: float) -> list:
        return [r for r in self.rows if r.epsilon == eps]

    def errors(self, eps: float) -> list:
        return [r.e_value for r in self.row(eps)]

    def orders(self, eps: float) -> list:
        return [r.order for r in self.row(eps)]

    def fill_orders(self):
        for eps in self.plan.epsilons:
            cells = sorted(self.row(eps), key=lambda r: r.column)
            for prev, cur in zip(cells, cells[1:]):
                if prev.e_value and cur.e_value:
                    cur.order = observed_order(prev.e_value, cur.e_value)

    def diagonal_orders(self, eps: float) -> list:
        """Orders in the cells on and above the eps-scalability diagonal."""
        start = max(1, math.ceil(self.plan.diagonal_column(eps) - 1e-9))
        return [r.order for r in self.row(eps) if r.column >= start]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "epsilon_label", "column", "resolution", "error", "order", "status"])
        for r in self.rows:
            w.writerow([
                f"{r.epsilon:.5e}",
                r.epsilon_label,
                r.column,
                f"{r.resolution:.5e}",
                "" if r.e_value is None else f"{r.e_value:.5e}",
                "" if r.order is None else f"{r.order:.2f}",
                r.status,
            ])
        return buf.getvalue()

    def format_text(self) -> str:
        plan = self.plan
        head = "h" if plan.axis == "spatial" else ("k" if plan.equation == "oscillatory" else "tau")
        lines = [f"{plan.name}: {plan.axis} errors, e at t = "
                 f"{'1/eps^p' if plan.t_final is None else plan.t_final}"]
        for eps, label in zip(plan.epsilons, plan.epsilon_labels):
            cells = self.row(eps)
            lines.append(f"eps={label:<9}" + "".join(
                f"{'fail' if c.e_value is None else format(c.e_value, '.2e'):>11}" for c in cells))
            lines.append(f"{'order':<13}" + "".join(
                f"{'-' if c.order is None else format(c.order, '.2f'):>11}" for c in cells))
        res = self.row(plan.epsilons[0])
        lines.append(f"{head:<13}" + "".join(f"{c.resolution:>11.4g}" for c in res))
        return "\n".join(lines)


def _reference_values(plan: StudyPlan, eps: float, cache: Optional[ReferenceCache]) -> GridFunction:
    fine = plan.reference_grid(eps)
    spec = plan.problem(eps, fine)
    if isinstance(spec, OscillatoryProblemSpec):
        spec = spec.time_problem()
    scale = plan.time_scale(eps)
    t_final = plan.final_time(eps) / scale
    _, tau_e = fit_step(t_final, plan.reference_dt(eps) / scale)
    key = cache.key(spec, t_final, tau_e) if cache is not None else None
    if key is not None:
        hit = cache.load(key, fine)
        if hit is not None:
            return hit
    u, _ = ewi_integrate(spec, tau_e, t_final)
    if key is not None:
        cache.store(key, u, _params(spec, t_final, tau_e))
    return u


def _run_cell(plan: StudyPlan, eps: float, column: int, reference: GridFunction):
    grid = plan.study_grids(eps)[column]
    t_final = plan.final_time(eps)
    n, dt = fit_step(t_final, plan.study_steps(eps)[column])
    resolution = grid.h if plan.axis == "spatial" else dt
    ref = reference.restrict(grid)
    if plan.scheme == "reference":
        return resolution, 0.0, "ok", {}
    spec = plan.problem(eps, grid)
    cfg = RunConfig(energy_every=0, use_discrete_laplacian=plan.discrete_first_step())
    try:
        if plan.equation == "oscillatory":
            traj = osc_integrate(spec, plan.scheme, dt, t_final, cfg)
        else:
            traj = integrate(spec, plan.scheme, dt, t_final, cfg)
    except KGError as exc:
        return resolution, None, f"failed: {exc}", {}
    extra = {"sigma_max": traj.sigma_max}
    if plan.domain == "whole-space":
        extra["boundary_margin"] = boundary_margin(traj.final.curr.values)
    return resolution, error_functional(traj.final.curr, ref), "ok", extra


def run_study(plan: StudyPlan, workers: int = 1, cache: Optional[ReferenceCache] = None) -> ConvergenceTable:
    """Fill the error table of ``plan``; rows come out in plan order."""
    table = ConvergenceTable(plan, metadata=dict(plan.metadata()))
    for eps, label in zip(plan.epsilons, plan.epsilon_labels):
        fine = plan.reference_grid(eps)
        for g in plan.study_grids(eps):
            if not fine.is_refinement_of(g):
                raise ConfigError(f"study grid M={g.M} does not nest in reference grid M={fine.M}")
        log.info("%s: eps=%s reference on M=%d", plan.name, label, fine.M)
        reference = _reference_values(plan, eps, cache)
        cols = range(plan.columns())
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_cell, [plan] * len(cols), [eps] * len(cols),
                                        cols, [reference] * len(cols)))
        else:
            results = [_run_cell(plan, eps, c, reference) for c in cols]
        margins = []
        for c, (res, err, status, extra) in zip(cols, results):
            table.rows.append(TableRow(eps, label, c, res, err, None, status))
            if "boundary_margin" in extra:
                margins.append(extra["boundary_margin"])
            log.info("  col %d: resolution=%.4g error=%s", c, res, err)
        if margins:
            table.metadata[f"boundary_margin[{label}]"] = max(margins)
        if plan.domain == "whole-space":
            table.metadata[f"reference_boundary_margin[{label}]"] = boundary_margin(reference.values)
    table.fill_orders()
    return table
