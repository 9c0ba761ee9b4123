import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from compact_kg.compact import CompactOperator, compact_symbol, laplacian_symbol
from compact_kg.errors import GridMismatchError
from compact_kg.fourier import apply_symbol
from compact_kg.grid import GridFunction, PeriodicGrid, norm_l2, second_diff

from conftest import torus


def test_apply_examples():
    g = PeriodicGrid(0.0, 4.0, 4)
    op = CompactOperator(g)
    np.testing.assert_allclose(op.apply(GridFunction(g, [1, 0, 0, 0])).values,
                               [10 / 12, 1 / 12, 0, 1 / 12], rtol=1e-15)
    np.testing.assert_allclose(op.apply(GridFunction.constant(g, 3.0)).values, 3.0, rtol=1e-15)


def test_symbol_bounds_and_modes():
    for M in (4, 6, 8, 64, 256):
        s = CompactOperator(torus(M)).symbol
        assert s.min() >= 2 / 3 - 1e-15 and s.max() == pytest.approx(1.0)
        assert s[M // 2] == pytest.approx(1.0)
    g = torus(16)
    op = CompactOperator(g)
    for l in (0, 1, 5, 8):
        u = g.sample(lambda x: np.cos(l * x))
        np.testing.assert_allclose(op.apply(u).values, compact_symbol(16, [l])[0] * u.values, atol=1e-14)


def test_solve(rng):
    g = torus(32)
    op = CompactOperator(g)
    u = GridFunction(g, rng.standard_normal(32))
    assert norm_l2(op.solve(op.apply(u)) - u) <= 1e-12 * norm_l2(u)
    assert norm_l2(op.apply(op.solve(u)) - u) <= 1e-12 * norm_l2(u)
    np.testing.assert_allclose(op.solve(GridFunction.constant(g, 2.0)).values, 2.0, rtol=1e-14)
    nyq = GridFunction(g, (-1.0) ** np.arange(32))
    np.testing.assert_allclose(op.solve(nyq).values, 1.5 * nyq.values, rtol=1e-13)


def test_solve_matches_dense(rng):
    g = torus(8)
    op = CompactOperator(g)
    v = rng.standard_normal(8)
    np.testing.assert_allclose(op.solve(GridFunction(g, v)).values, np.linalg.solve(op.dense(), v),
                               atol=1e-13)


def test_grid_mismatch():
    with pytest.raises(GridMismatchError):
        CompactOperator(torus(8)).apply(GridFunction.zeros(torus(16)))


def test_star_norm_examples(rng):
    g = torus(16)
    op = CompactOperator(g)
    c = GridFunction.constant(g, -1.5)
    assert op.star_norm(c) == pytest.approx(norm_l2(c), rel=1e-14)
    nyq = GridFunction(g, (-1.0) ** np.arange(16))
    assert op.star_norm(nyq) == pytest.approx(math.sqrt(6) / 2 * norm_l2(nyq), rel=1e-14)
    u = GridFunction(g, rng.standard_normal(16))
    assert op.star_norm(u) == pytest.approx(op.star_norm_direct(u), rel=1e-12)


def test_laplacian_symbol_matches_operator():
    g = torus(16)
    sym = laplacian_symbol(g)
    op = CompactOperator(g)
    for l in (0, 2, 7, 8):
        u = g.sample(lambda x: np.cos(l * x))
        lhs = -op.solve(second_diff(u)).values
        np.testing.assert_allclose(lhs, sym[l] * u.values, atol=1e-11)
    np.testing.assert_allclose(apply_symbol(np.ones(16), sym), 0.0, atol=1e-14)


def test_commutation_constant_and_dense(rng):
    g = torus(8)
    op = CompactOperator(g)
    assert op.commutes_with_diff_check(GridFunction.constant(g, 4.0)) == 0.0
    u = rng.standard_normal(8)
    assert op.commutes_with_diff_check(GridFunction(g, u)) <= 1e-12 * np.max(np.abs(u)) / g.h
    A = op.dense()
    D = (np.roll(np.eye(8), 1, axis=1) - np.eye(8)) / g.h
    assert np.max(np.abs(A @ D - D @ A)) < 1e-14
    Ai = np.linalg.inv(A)
    np.testing.assert_allclose(Ai @ D @ u, op.solve(GridFunction(g, D @ u)).values, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([4, 8, 64]), st.data())
def test_norm_equivalence(M, data):
    a = data.draw(arrays(float, M, elements=st.floats(-1e3, 1e3)))
    g = torus(M)
    op = CompactOperator(g)
    u = GridFunction(g, a)
    l2, star = norm_l2(u), op.star_norm(u)
    assert l2 - 1e-12 * max(l2, 1e-300) <= star <= math.sqrt(6) / 2 * l2 + 1e-12 * max(l2, 1e-300)


@settings(max_examples=40, deadline=None)
@given(arrays(float, 10, elements=st.floats(-10, 10)), arrays(float, 10, elements=st.floats(-10, 10)),
       st.floats(-5, 5))
def test_linearity(a, b, s):
    g = torus(10)
    op = CompactOperator(g)
    u, v = GridFunction(g, a), GridFunction(g, b)
    np.testing.assert_allclose(op.solve(u + v * s).values, (op.solve(u) + op.solve(v) * s).values,
                               atol=1e-11)
    np.testing.assert_allclose(op.apply(u + v * s).values, (op.apply(u) + op.apply(v) * s).values,
                               atol=1e-11)
