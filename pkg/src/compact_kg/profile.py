"""Plot data for the oscillatory solutions: v(x0, s) time series and v(x, s_final) profiles."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, KGError
from .grid import PeriodicGrid
from .oscillatory import OscillatoryProblemSpec, Variant, osc_integrate, truncated_domain
from .problems import DATA
from .schemes import RunConfig, fit_step


@dataclass(frozen=True)
class ProfilePlan:
    epsilons: tuple
    epsilon_labels: tuple
    p: int = 2
    scheme: str = "semi-implicit"
    domain: str = "torus"
    data: str = "trig"
    h: float = math.pi / 64
    k0: float = 0.01
    k_eps_exponent: Optional[float] = None
    s_final: float = 1.0
    x0: Optional[float] = None
    max_points: int = 4000

    def step(self, eps: float) -> float:
        exponent = 1.5 * self.p if self.k_eps_exponent is None else self.k_eps_exponent
        return self.k0 * eps ** exponent

    def grid(self, eps: float) -> PeriodicGrid:
        a, b = truncated_domain(eps) if self.domain == "whole-space" else (0.0, 2.0 * math.pi)
        return PeriodicGrid.from_mesh_size(a, b, self.h)

    def probe_point(self) -> float:
        if self.x0 is not None:
            return self.x0
        return 0.0 if self.domain == "whole-space" else math.pi

    def problem(self, eps: float) -> OscillatoryProblemSpec:
        phi, gamma, phi_xx = DATA[self.data]
        variant = Variant.WHOLE_SPACE if self.domain == "whole-space" else Variant.TORUS
        return OscillatoryProblemSpec(self.grid(eps), eps, self.p, phi, gamma, phi_xx,
                                      True, f"{self.data}:{self.domain}", variant)


def profile_preset(name: str) -> ProfilePlan:
    if name == "fig1":
        return ProfilePlan((1.0, 0.5, 0.25, 0.125), ("1", "1/2", "1/4", "1/8"),
                           p=2, domain="torus", data="trig", h=math.pi / 64)
    if name == "fig2":
        labels = ("1", "1/2", "1/4")
        return ProfilePlan((1.0, 0.5, 0.25), labels, p=2, domain="whole-space", data="gaussian",
                           h=1 / 16)
    raise ConfigError(f"unknown profile preset {name!r}; expected fig1 or fig2")


def node_index(grid: PeriodicGrid, x0: float) -> int:
    j = round((x0 - grid.a) / grid.h)
    if abs(grid.a + j * grid.h - x0) > 1e-9 * grid.length:
        raise ConfigError(f"x0={x0} is not a grid node (h={grid.h})")
    return int(j) % grid.M


def run_profile(plan: ProfilePlan) -> dict:
    """Per epsilon: {"time": [(s, v(x0, s))], "space": [(x, v(x, s_final))]}."""
    out = {}
    for eps, label in zip(plan.epsilons, plan.epsilon_labels):
        spec = plan.problem(eps)
        _, k = fit_step(plan.s_final, plan.step(eps))
        j = node_index(spec.grid, plan.probe_point())
        traj = osc_integrate(spec, plan.scheme, k, plan.s_final,
                             RunConfig(energy_every=0, probe_index=j))
        stride = max(1, math.ceil(len(traj.probe) / plan.max_points))
        series = traj.probe[::stride]
        if series[-1] is not traj.probe[-1]:
            series.append(traj.probe[-1])
        space = list(zip(spec.grid.x.tolist(), traj.final.curr.values.tolist()))
        out[label] = {"epsilon": eps, "k": k, "time": series, "space": space}
    return out


def zero_crossings(values) -> int:
    """Number of sign changes in a sampled series (exact zeros are skipped)."""
    v = np.asarray(values, dtype=float)
    s = np.sign(v[v != 0.0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def emit_profile(results: dict, path, mode: str = "time"):
    """Write long-format CSV: (epsilon, s, v) for ``time`` or (epsilon, x, v) for ``space``."""
    if mode not in ("time", "space"):
        raise ConfigError(f"mode must be 'time' or 'space', got {mode!r}")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epsilon", "s" if mode == "time" else "x", "v"])
            for label, res in results.items():
                for a, v in res[mode]:
                    w.writerow([label, f"{a:.10e}", f"{v:.10e}"])
    except OSError as exc:
        raise KGError(f"cannot write {path}: {exc}") from exc
    return path
