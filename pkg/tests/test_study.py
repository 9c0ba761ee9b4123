import math

import pytest

from compact_kg.errors import ConfigError
from compact_kg.study import StudyPlan, observed_order, preset, preset_plan, run_study


def small_spatial(**kw):
    base = dict(axis="spatial", scheme="semi-implicit", p=2, epsilons=(1.0,), h0=math.pi / 4,
                halvings=2, dt=1e-3, t_final=0.2, ref_dt=1e-3, name="small")
    base.update(kw)
    return StudyPlan(**base)


def test_observed_order():
    assert observed_order(1.50e-2, 9.58e-4) == pytest.approx(3.97, abs=0.005)
    assert observed_order(0.3, 0.3) == 0.0
    assert observed_order(8.0, 1.0) == 3.0
    for bad in ((0.0, 1.0), (1.0, -1.0)):
        with pytest.raises(ValueError):
            observed_order(*bad)


def test_plan_validation():
    with pytest.raises(ConfigError):
        small_spatial(halvings=1)
    with pytest.raises(ConfigError):
        small_spatial(ref_h=math.pi / 32)  # finest is pi/16, needs pi/64
    with pytest.raises(ConfigError):
        StudyPlan(axis="temporal", scheme="implicit", p=2, epsilons=(1.0,), dt0=0.1, halvings=2,
                  ref_dt=0.01)
    with pytest.raises(ConfigError):
        small_spatial(epsilons=(1.5,))
    with pytest.raises(ConfigError):
        small_spatial(scheme="leapfrog")


def test_table1_preset():
    kw = preset("table1")
    assert kw["p"] == 2 and kw["data"] == "trig" and kw["domain"] == "torus"
    assert kw["dt"] == 2e-5 and kw["h0"] == math.pi / 8
    plan = StudyPlan(**kw)
    assert plan.domain_for(1.0) == (0.0, 2 * math.pi)
    assert plan.final_time(0.25) == 16.0
    assert [g.M for g in plan.study_grids(1.0)] == [16, 32, 64, 128, 256]
    assert plan.reference_grid(1.0).M == 1024
    assert len(preset_plan("table1", full=True).epsilons) == 4


def test_diagonal_columns():
    t1 = preset_plan("table1")
    assert t1.diagonal_column(1.0) == 1 and t1.diagonal_column(0.25) == 2
    t2 = preset_plan("table2")
    assert t2.diagonal_column(0.25) == 2
    t4 = preset_plan("table4")
    assert t4.diagonal_column(2 ** (-2 / 3)) == pytest.approx(1.0)


def test_reference_scheme_gives_zero():
    table = run_study(small_spatial(scheme="reference"))
    assert all(r.e_value == 0.0 for r in table.rows)


def test_small_spatial_study_is_fourth_order_and_deterministic():
    plan = small_spatial(h0=math.pi / 8, dt=1e-4, ref_dt=1e-4, t_final=0.1)
    a = run_study(plan)
    assert all(o > 3.7 for o in a.orders(1.0)[1:])
    assert a.diagonal_orders(1.0) == a.orders(1.0)[1:]
    b = run_study(plan, workers=2)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == "epsilon,epsilon_label,column,resolution,error,order,status"
    assert "order" in a.format_text()


def test_temporal_study_orders():
    plan = StudyPlan(axis="temporal", scheme="implicit", p=2, epsilons=(1.0, 0.5), h=math.pi / 64,
                     dt0=0.1, halvings=3, t_final=1.0, ref_dt=0.1 / 64)
    table = run_study(plan)
    for eps in plan.epsilons:
        orders = table.orders(eps)
        assert all(o > 1.7 for o in orders[1:]) and all(o > 1.85 for o in orders[2:])


def test_whole_space_study_records_margins():
    plan = StudyPlan(axis="spatial", scheme="semi-implicit", p=1, epsilons=(1.0,), equation="oscillatory",
                     domain="whole-space", data="gaussian", h0=0.5, halvings=2, dt=1e-3, t_final=0.1,
                     ref_h=1 / 32, ref_dt=1e-3)
    table = run_study(plan)
    assert "boundary_margin[1]" in table.metadata
    assert "reference_boundary_margin[1]" in table.metadata
    assert all(r.status == "ok" for r in table.rows)


def test_failed_cells_are_recorded():
    # sigma_max >= 9 with tau = 2 and 1 violates the semi-implicit bound 2/sqrt(8)
    plan = StudyPlan(axis="temporal", scheme="semi-implicit", p=2, epsilons=(1.0,), h=math.pi / 8,
                     dt0=2.0, halvings=2, t_final=200.0, ref_dt=0.1)
    table = run_study(plan)
    statuses = [r.status for r in table.rows]
    assert statuses[0].startswith("failed")
    assert table.rows[0].e_value is None
    assert len(table.rows) == 3
