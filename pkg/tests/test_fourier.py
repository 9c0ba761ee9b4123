import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from compact_kg.errors import SymmetryError
from compact_kg.fourier import (
    SpectralCoefficients,
    dft,
    inverse_dft,
    mode_indices,
    naive_dft,
    wavenumbers,
)
from compact_kg.grid import GridFunction, norm_l2

from conftest import torus


def test_constant_and_cosine():
    g = torus(8)
    c = dft(GridFunction.constant(g, 2.0))
    assert c[0] == pytest.approx(2.0)
    assert np.max(np.abs(np.delete(c.coeffs, 4))) < 1e-15
    j = np.arange(8)
    c = dft(GridFunction(g, np.cos(2 * np.pi * j / 8)))
    assert c[1] == pytest.approx(0.5) and c[-1] == pytest.approx(0.5)
    others = [c[l] for l in mode_indices(8) if abs(l) != 1]
    assert max(abs(x) for x in others) < 1e-15


def test_matches_naive_oracle(rng):
    for M in (4, 6, 10, 64):
        u = rng.standard_normal(M)
        c = dft(GridFunction(torus(M), u))
        np.testing.assert_allclose(c.coeffs, naive_dft(u), atol=1e-13)


def test_round_trip(rng):
    for M in (4, 8, 30, 256):
        u = GridFunction(torus(M), rng.standard_normal(M))
        back = inverse_dft(dft(u))
        assert np.max(np.abs(back.values - u.values)) <= 1e-12 * np.max(np.abs(u.values))


def test_inverse_examples():
    g = torus(8)
    coeffs = np.zeros(8, complex)
    coeffs[4] = 1.0
    np.testing.assert_allclose(inverse_dft(SpectralCoefficients(g, coeffs)).values, 1.0)
    coeffs = np.zeros(8, complex)
    coeffs[4 + 2] = coeffs[4 - 2] = 0.5
    u = inverse_dft(SpectralCoefficients(g, coeffs))
    np.testing.assert_allclose(u.values, np.cos(2 * 2 * np.pi * np.arange(8) / 8), atol=1e-15)


def test_non_hermitian_rejected():
    coeffs = np.zeros(8, complex)
    coeffs[4 + 1] = 1.0
    with pytest.raises(SymmetryError):
        inverse_dft(SpectralCoefficients(torus(8), coeffs))
    coeffs = np.zeros(8, complex)
    coeffs[0] = 1j  # Nyquist must be real
    with pytest.raises(SymmetryError):
        inverse_dft(SpectralCoefficients(torus(8), coeffs))


def test_nyquist_wavenumber():
    g = torus(8)
    mu = wavenumbers(g)
    assert mu[-1] == pytest.approx(-math.pi * 8 / g.length)
    np.testing.assert_allclose(mu[:4], [0, 1, 2, 3])


@settings(max_examples=50, deadline=None)
@given(arrays(float, 16, elements=st.floats(-1e3, 1e3)))
def test_parseval(a):
    g = torus(16)
    u = GridFunction(g, a)
    c = dft(u)
    lhs = norm_l2(u) ** 2
    rhs = g.length * float(np.sum(np.abs(c.coeffs) ** 2))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(arrays(float, 12, elements=st.floats(-10, 10)), arrays(float, 12, elements=st.floats(-10, 10)),
       st.floats(-3, 3), st.integers(0, 11))
def test_linearity_and_shift(a, b, s, k):
    g = torus(12)
    u, v = GridFunction(g, a), GridFunction(g, b)
    np.testing.assert_allclose(dft(u + v * s).coeffs, naive_dft(a) + s * naive_dft(b), atol=1e-11)
    # u_{j+k} has coefficients c_l exp(2 pi i l k / M)
    phase = np.exp(2j * np.pi * mode_indices(12) * k / 12)
    np.testing.assert_allclose(dft(u.shift(k)).coeffs, naive_dft(a) * phase, atol=1e-11)
