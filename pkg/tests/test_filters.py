import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracwave.errors import AllMomentsVanish, DegenerateFilter, NotAFilter, ValidationError
from fracwave.filters import (
    Filter,
    c1_c2,
    c_h,
    kappa_asymptotic,
    parse_filter,
    phi_alpha,
    phi_ratio,
    thin,
    validate_filter,
)

mpmath.mp.dps = 50


def phi_mp(H, j, a, b):
    """High-precision double sum."""
    return float(
        mpmath.fsum(
            mpmath.mpf(x) * mpmath.mpf(y) * abs(mpmath.mpf(j + q - r)) ** (2 * mpmath.mpf(H))
            for q, x in enumerate(a)
            for r, y in enumerate(b)
        )
    )


def phi_H(H, j):
    return (abs(j + 1) ** (2 * H) - 2 * abs(j) ** (2 * H) + abs(j - 1) ** (2 * H)) / 2


@pytest.mark.parametrize("coeffs, order", [((1, -1), 1), ((1, -2, 1), 2), ((1, -3, 3, -1), 3)])
def test_orders(coeffs, order):
    f = validate_filter(coeffs)
    assert f.order == order
    assert f.length == len(coeffs)
    assert f.l == len(coeffs) - 1


def test_not_a_filter():
    with pytest.raises(NotAFilter):
        validate_filter((1, 1))


def test_all_moments_vanish():
    with pytest.raises(AllMomentsVanish):
        validate_filter((0, 0, 0))


def test_empty_and_nonfinite():
    with pytest.raises(ValidationError):
        validate_filter(())
    with pytest.raises(ValidationError):
        validate_filter((1, float("nan")))


@given(st.floats(min_value=1e-3, max_value=1e3) | st.floats(min_value=-1e3, max_value=-1e-3))
def test_order_invariant_under_scaling(c):
    for coeffs in [(1, -1), (1, -2, 1), (1, -3, 3, -1)]:
        assert validate_filter([c * a for a in coeffs]).order == validate_filter(coeffs).order


def test_parse_filter_formats():
    assert parse_filter("1,-2,1") == validate_filter((1, -2, 1))
    assert parse_filter("[1, -1]") == validate_filter((1, -1))
    with pytest.raises(ValidationError):
        parse_filter("1,a")


def test_thin():
    assert thin(validate_filter((1, -1))).coeffs == (1, 0, -1)
    assert thin(validate_filter((1, -2, 1))).coeffs == (1, 0, -2, 0, 1)
    assert thin(thin(validate_filter((1, -1)))).coeffs == (1, 0, 0, 0, -1)
    g = thin(validate_filter((1, -2, 1)))
    assert validate_filter(g.coeffs).order == 2


@pytest.mark.parametrize("H", [0.55, 0.7, 0.95])
def test_thinning_identity(H, corpus_filter):
    g = thin(corpus_filter)
    assert phi_alpha(H, 0, g) == pytest.approx(2 ** (2 * H) * phi_alpha(H, 0, corpus_filter), rel=1e-12)
    assert phi_alpha(H + 0.5, 0, g) == pytest.approx(
        2 ** (2 * H + 1) * phi_alpha(H + 0.5, 0, corpus_filter), rel=1e-12
    )


def test_phi_at_zero_increment():
    for H in (0.51, 0.7, 0.99, 1.3):
        assert phi_alpha(H, 0, validate_filter((1, -1))) == pytest.approx(-2.0, abs=1e-15)


def test_phi_second_difference_at_zero():
    expected = -8 + 2 * 2**1.2
    assert phi_alpha(0.6, 0, validate_filter((1, -2, 1))) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("H", [0.6, 0.7, 0.9])
def test_increment_is_minus_two_phi_H(H, inc):
    # the naive second difference is only accurate at short lags
    j = np.arange(1, 31)
    np.testing.assert_allclose(phi_alpha(H, j, inc), -2 * phi_H(H, j.astype(float)), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("H", [0.55, 0.7, 0.95])
@pytest.mark.parametrize("j", [0, 1, 2, 5, 7, 13, 100, 2500, 10**5])
def test_phi_against_high_precision(H, j, corpus_filter):
    ref = phi_mp(H, j, corpus_filter.coeffs, corpus_filter.coeffs)
    got = phi_alpha(H, j, corpus_filter)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("j", [-40, -5, -1, 0, 1, 3, 40, 5000])
def test_cross_phi_against_high_precision(j):
    a, b = validate_filter((1, -1)), validate_filter((1, -2, 1))
    assert phi_alpha(0.7, j, a, b) == pytest.approx(phi_mp(0.7, j, a.coeffs, b.coeffs), rel=1e-9)
    # swapping the filters mirrors the lag
    assert phi_alpha(0.7, j, a, b) == pytest.approx(phi_alpha(0.7, -j, b, a), rel=1e-12)


def test_phi_vectorised_matches_scalar(d2):
    j = np.array([0, 1, 3, 4, 5, 50])
    vec = phi_alpha(0.8, j, d2)
    for jj, v in zip(j, vec):
        assert v == phi_alpha(0.8, int(jj), d2)


def test_phi_ratio(inc):
    assert phi_ratio(0.7, 0, inc) == 1.0
    # Phi(1) = 2 - 2**1.4 and Phi(0) = -2
    assert phi_ratio(0.7, 1, inc) == pytest.approx((2**1.4 - 2) / 2, rel=1e-13)
    v = np.arange(1, 101)
    for f in (inc, validate_filter((1, -2, 1))):
        assert np.all(np.abs(phi_ratio(0.7, v, f)) <= 1.0)


def test_phi_ratio_degenerate():
    # Phi_{1,(1,-2,1)}(0) = -8 + 2 * 4 = 0
    with pytest.raises(DegenerateFilter):
        phi_ratio(1.0, 3, validate_filter((1, -2, 1)))


def test_kappa_closed_form(inc, d2):
    # 2H(2H-1)/2! * sum a_q a_r (q-r)^2 with the latter = -2 for (1,-1)
    assert kappa_asymptotic(0.7, inc) == pytest.approx(1.4 * 0.4 / 2 * -2, rel=1e-14)
    # sum a_q a_r (q-r)^4 for (1,-2,1): pairs at distance 2 give 2*16, at distance 1 give 4*(-2)
    m4 = 2 * 16 + 4 * -2
    assert kappa_asymptotic(0.7, d2) == pytest.approx(1.4 * 0.4 * -0.6 * -1.6 / 24 * m4, rel=1e-14)


@pytest.mark.parametrize("H, coeffs", [(0.6, (1, -1)), (0.7, (1, -2, 1))])
def test_kappa_ratio_at_large_lag(H, coeffs):
    f = validate_filter(coeffs)
    k = 10**4
    r = phi_alpha(H, k, f) / (kappa_asymptotic(H, f) * k ** (2 * H - 2 * f.order))
    assert 0.99 <= r <= 1.01
    assert r == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("H", [0.6, 0.8])
def test_decay_slope(H, corpus_filter):
    k = np.array([100, 300, 1000, 3000, 10000])
    slope = np.polyfit(np.log(k), np.log(np.abs(phi_alpha(H, k, corpus_filter))), 1)[0]
    assert abs(slope - (2 * H - 2 * corpus_filter.order)) < 0.05


def test_c_h_and_c1(inc):
    assert c_h(0.7) == pytest.approx(0.1875, rel=1e-14)
    c1, c2 = c1_c2(0.7, 3.0, inc)
    assert c1 == pytest.approx(1.5, rel=1e-14)
    assert c2 == pytest.approx(0.1875 / 2 * -2, rel=1e-14)


@pytest.mark.parametrize("H", [0.51, 0.6, 0.75, 0.9, 0.99])
def test_c1_positive_on_corpus(H, corpus_filter):
    assert c1_c2(H, 3.0, corpus_filter)[0] > 0


@settings(max_examples=50)
@given(
    st.lists(st.integers(-5, 5), min_size=2, max_size=5).filter(lambda c: any(c)),
    st.floats(0.51, 0.99),
    st.integers(0, 30),
)
def test_phi_matches_double_loop_random_filters(raw, H, j):
    c = np.array(raw, dtype=float)
    c = c - c.mean()  # forces a zero sum
    if np.max(np.abs(c)) < 1e-9:
        return
    try:
        f = validate_filter(c)
    except AllMomentsVanish:
        return
    brute = math.fsum(a * b * abs(j + q - r) ** (2 * H) for q, a in enumerate(c) for r, b in enumerate(c))
    assert phi_alpha(H, j, f) == pytest.approx(brute, rel=1e-9, abs=1e-9)


def test_filter_str_and_label():
    f = validate_filter((1, -2, 1))
    assert str(f) == "(1,-2,1)"
    assert f.label == "1,-2,1"
    assert isinstance(f, Filter)
