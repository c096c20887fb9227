import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracwave.covariance import WaveModel, pi_alpha
from fracwave.errors import FilterTooLong
from fracwave.filters import validate_filter
from fracwave.sampler import FieldSlice, sample_batch, sample_slice
from fracwave.variations import (
    filtered_increments,
    g_stats,
    gaussian_abs_moment,
    hermite,
    hermite_coeff,
    s_stat,
    v_stat,
)

M7 = WaveModel(0.7, 3.0)


def test_increment_definition(inc):
    s = sample_slice(M7, 20, 4)
    np.testing.assert_array_equal(filtered_increments(s, inc), s.values[1:] - s.values[:-1])


def test_filtered_increments_general(d2):
    u = np.random.default_rng(0).normal(size=31)
    out = filtered_increments(u, d2)
    assert out.size == 31 - 2
    expected = [u[i] - 2 * u[i - 1] + u[i - 2] for i in range(2, 31)]
    np.testing.assert_allclose(out, expected, rtol=1e-14, atol=1e-14)


def test_annihilation(corpus_filter, d2):
    assert np.all(filtered_increments(np.full(20, 3.7), corpus_filter) == 0)
    np.testing.assert_allclose(filtered_increments(np.arange(21) / 20, d2), 0, atol=1e-15)


def test_filter_too_long():
    with pytest.raises(FilterTooLong):
        filtered_increments(np.zeros(3), validate_filter((1, -3, 3, -1)))


def test_gaussian_abs_moment():
    assert gaussian_abs_moment(2) == pytest.approx(1.0, rel=1e-14)
    assert gaussian_abs_moment(4) == pytest.approx(3.0, rel=1e-14)
    assert gaussian_abs_moment(1) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    assert gaussian_abs_moment(6) == pytest.approx(15.0, rel=1e-14)


def test_hermite_low_orders():
    assert hermite(2, 0.0) == -1.0
    assert hermite(1, 1.7) == 1.7
    assert hermite(0, 3.0) == 1.0
    assert hermite(4, 2.0) == pytest.approx(2**4 - 6 * 4 + 3)


def test_hermite_recurrence():
    x = np.linspace(-5, 5, 41)
    for j in range(1, 20):
        lhs = hermite(j + 1, x)
        rhs = x * hermite(j, x) - j * hermite(j - 1, x)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.max(np.abs(lhs)))


def test_hermite_orthogonality():
    x, w = np.polynomial.hermite_e.hermegauss(40)
    w = w / math.sqrt(2 * math.pi)
    for n in range(6):
        for m in range(6):
            val = np.sum(w * hermite(n, x) * hermite(m, x))
            assert val == pytest.approx(math.factorial(n) if n == m else 0.0, abs=1e-9)


def test_hermite_coeff_values():
    assert hermite_coeff(2, 1) == 1.0
    assert hermite_coeff(4, 1) == 2.0
    assert hermite_coeff(4, 2) == pytest.approx(1 / 3)
    assert hermite_coeff(2, 2) == 0.0
    assert hermite_coeff(4, 3) == 0.0
    assert hermite_coeff(3, 0) == 0.0


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_hermite_expansion_reconstructs_power(k):
    # |x|^k / E_k - 1 = sum_j c^k_{2j} He_{2j}(x); for odd k the series is infinite,
    # so compare projections computed by quadrature instead
    x, w = np.polynomial.hermite_e.hermegauss(120)
    w = w / math.sqrt(2 * math.pi)
    g = np.abs(x) ** k / gaussian_abs_moment(k) - 1
    for j in range(1, 4):
        proj = np.sum(w * g * hermite(2 * j, x)) / math.factorial(2 * j)
        assert proj == pytest.approx(hermite_coeff(k, j), abs=2e-3 if k % 2 else 1e-10)


def test_v_stat_consistency(inc):
    s = sample_slice(M7, 200, 2)
    r = v_stat(s, inc, 2)
    assert r.G == math.sqrt(200 - 1) * r.V
    U = np.diff(s.values)
    pi0 = pi_alpha(M7, inc, 200, 0)
    assert r.V == pytest.approx(np.sum(U**2 / pi0 - 1) / 199, rel=1e-12)
    assert r.S == pytest.approx(np.sum(U[:-1] ** 2) / 199, rel=1e-12)
    assert r.row() == (2, "1,-1", 200, r.V, r.S, r.G)


@given(st.floats(0.01, 100.0))
def test_v_invariant_under_joint_scaling(c):
    s = sample_slice(M7, 50, 3)
    f = validate_filter((1, -2, 1))
    U = filtered_increments(s, f)
    pi0 = pi_alpha(M7, f, 50, 0)
    a = np.sum(np.abs(U) ** 3 / (gaussian_abs_moment(3) * pi0**1.5) - 1)
    b = np.sum(np.abs(c * U) ** 3 / (gaussian_abs_moment(3) * (c**2 * pi0) ** 1.5) - 1)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)


def test_v_centred(inc):
    X = np.stack([s.values for s in sample_batch(M7, 500, 2000, seed=77)])
    V = g_stats(X, M7, inc, 2) / math.sqrt(499)
    assert abs(V.mean()) < 4 * V.std(ddof=1) / math.sqrt(V.size)


def test_vectorised_helpers_match(d2):
    X = np.stack([s.values for s in sample_batch(M7, 100, 5, seed=1)])
    G = g_stats(X, M7, d2, 2)
    S = s_stat(X, d2, 2)
    for i in range(5):
        r = v_stat(FieldSlice.from_values(M7, X[i]), d2, 2)
        assert G[i] == pytest.approx(r.G, rel=1e-12, abs=1e-14)
        assert S[i] == pytest.approx(r.S, rel=1e-12)
