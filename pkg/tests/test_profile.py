import math

import pytest

from compact_kg.errors import ConfigError, KGError
from compact_kg.grid import PeriodicGrid
from compact_kg.profile import (
    ProfilePlan,
    emit_profile,
    node_index,
    profile_preset,
    run_profile,
    zero_crossings,
)


def test_presets():
    f1 = profile_preset("fig1")
    assert f1.epsilons == (1.0, 0.5, 0.25, 0.125) and f1.domain == "torus"
    f2 = profile_preset("fig2")
    assert f2.domain == "whole-space" and f2.data == "gaussian" and f2.probe_point() == 0.0
    with pytest.raises(ConfigError):
        profile_preset("fig3")


def test_node_index():
    g = PeriodicGrid(0.0, 2 * math.pi, 16)
    assert node_index(g, math.pi) == 8
    with pytest.raises(ConfigError):
        node_index(g, 1.0)


def test_initial_value_and_space_profile():
    plan = ProfilePlan((1.0,), ("1",), h=math.pi / 16)
    res = run_profile(plan)["1"]
    assert res["time"][0] == (0.0, 3.0)
    assert res["time"][-1][0] == pytest.approx(1.0)
    assert len(res["space"]) == 32


def test_zero_crossings():
    assert zero_crossings([1, -1, 1, 0, 1, -2]) == 3
    assert zero_crossings([0, 0, 0]) == 0


def test_crossings_scale_like_eps_power():
    plan = ProfilePlan((0.25, 0.125), ("1/4", "1/8"), p=2, h=math.pi / 32)
    res = run_profile(plan)
    counts = [zero_crossings([v for _, v in res[l]["time"]]) for l in plan.epsilon_labels]
    ratio = counts[1] / counts[0]
    assert 0.8 * 4 <= ratio <= 1.2 * 4


def test_emit(tmp_path):
    results = {"1": {"time": [(0.0, 0.0), (0.5, 0.0)], "space": [(0.0, 0.0)]}}
    path = emit_profile(results, tmp_path / "sub" / "t.csv", "time")
    lines = path.read_text().splitlines()
    assert lines[0] == "epsilon,s,v"
    assert all(float(l.split(",")[2]) == 0.0 for l in lines[1:])
    with pytest.raises(ConfigError):
        emit_profile(results, tmp_path / "x.csv", "other")
    (tmp_path / "blocker").write_text("")
    with pytest.raises(KGError, match="blocker"):
        emit_profile(results, tmp_path / "blocker" / "t.csv")
