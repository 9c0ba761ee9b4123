import math

import numpy as np
import pytest

from compact_kg.diagnostics import continuous_energy, discrete_energy
from compact_kg.errors import ConfigError
from compact_kg.grid import PeriodicGrid
from compact_kg.oscillatory import (
    OscillatoryProblemSpec,
    Variant,
    boundary_margin,
    osc_energy,
    osc_first_step,
    osc_integrate,
    osc_step,
    truncated_domain,
    whole_space_problem,
)
from compact_kg.problems import gaussian_gamma, gaussian_phi, gaussian_phi_xx, trig_gamma, trig_phi, trig_phi_xx
from compact_kg.schemes import RunConfig, SchemeState, first_step, integrate

from conftest import const_fn, torus


def osc_trig(M=32, eps=0.5, p=2):
    return OscillatoryProblemSpec(torus(M), eps, p, trig_phi, trig_gamma, trig_phi_xx, label="trig:torus")


def test_truncated_domain():
    spec = whole_space_problem(0.25, 1, 1 / 4, gaussian_phi, gaussian_gamma, gaussian_phi_xx)
    assert (spec.grid.a, spec.grid.b) == truncated_domain(0.25) == (-8.0, 8.0)
    assert spec.grid.b - spec.grid.a == 8 + 2 / 0.25
    assert spec.grid.M == 64 and spec.variant is Variant.WHOLE_SPACE
    with pytest.raises(ConfigError):
        OscillatoryProblemSpec(PeriodicGrid(-5.0, 5.0, 40), 0.5, 1, gaussian_phi, gaussian_gamma,
                               variant=Variant.WHOLE_SPACE)


def test_zero_first_step():
    spec = OscillatoryProblemSpec(torus(8), 0.5, 2, const_fn(0.0), const_fn(0.0))
    for reg in (False, True):
        assert np.all(osc_first_step(spec, 0.01, reg).curr.values == 0.0)


def test_first_step_matches_standard_at_eps_one():
    osc = osc_trig(eps=1.0)
    a = osc_first_step(osc, 0.013).curr.values
    b = first_step(osc.time_problem(), 0.013).curr.values
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("form", ["literal", "product"])
def test_regularized_difference_is_third_order(form):
    spec = osc_trig(eps=0.5, p=2)
    diffs = []
    for k in (1e-3, 5e-4, 2.5e-4):
        a = osc_first_step(spec, k, False).curr.values
        b = osc_first_step(spec, k, True, form).curr.values
        diffs.append(np.max(np.abs(a - b)))
    ratios = [diffs[i] / diffs[i + 1] for i in range(2)]
    assert all(7.0 < r < 9.0 for r in ratios)


def test_unknown_regularization_form():
    with pytest.raises(ConfigError):
        osc_first_step(osc_trig(), 0.01, True, "other")


@pytest.mark.parametrize("kind", ["implicit", "semi-implicit"])
@pytest.mark.parametrize("eps,p", [(0.5, 1), (0.5, 2)])
def test_rescaling_equivalence(kind, eps, p):
    osc = osc_trig(M=16, eps=eps, p=p)
    tau, n = 0.01, 200
    k = eps ** p * tau
    v = osc_integrate(osc, kind, k, n * k, RunConfig(energy_every=0)).final.curr.values
    u = integrate(osc.time_problem(), kind, tau, n * tau, RunConfig(energy_every=0)).final.curr.values
    assert np.max(np.abs(u - v)) <= 1e-11


@pytest.mark.parametrize("kind,tol", [("implicit", 1e-10), ("semi-implicit", 1e-12)])
def test_time_reversal(kind, tol):
    spec = osc_trig(eps=0.5)
    k = 1e-3
    s0 = osc_first_step(spec, k)
    s1 = osc_step(s0, spec, kind)
    back = osc_step(SchemeState(s1.curr, s1.prev, 1, k, 0.0), spec, kind)
    assert np.max(np.abs(back.curr.values - s0.prev.values)) <= tol * 3


def test_energy():
    spec = OscillatoryProblemSpec(torus(8), 0.5, 2, const_fn(0.0), const_fn(0.0))
    assert osc_energy(osc_first_step(spec, 0.01), spec) == 0.0
    osc = osc_trig(eps=1.0)
    s = osc_first_step(osc, 0.01)
    assert osc_energy(s, osc) == pytest.approx(discrete_energy(s.prev, s.curr, 0.01, osc), rel=1e-15)


def test_implicit_energy_conserved():
    spec = osc_trig(eps=0.5)
    traj = osc_integrate(spec, "implicit", 1e-3, 1.0)
    e = np.array([row[2] for row in traj.energy])
    assert len(e) == 1000
    assert np.max(np.abs(e - e[0])) / e[0] <= 1e-10
    assert traj.metadata["variant"] == "torus" and traj.metadata["k"] == 1e-3


def test_initial_energy_converges_to_continuous():
    errs = []
    for M in (16, 32, 64):
        spec = osc_trig(M, eps=0.5)
        k = 1e-7
        s = osc_first_step(spec, k)
        errs.append(abs(osc_energy(s, spec) - continuous_energy(spec.time_problem())))
    assert all(math.log2(errs[i] / errs[i + 1]) >= 2 for i in range(2))


def test_boundary_margin():
    v = np.zeros(100)
    v[50] = 1.0
    assert boundary_margin(v) == 0.0
    v[2] = -0.5
    assert boundary_margin(v) == 0.5
    v[2], v[10] = 0.0, 0.25  # index 10 is inside the central 90%
    assert boundary_margin(v) == 0.0
