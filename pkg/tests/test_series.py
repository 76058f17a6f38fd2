import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicoef.errors import (
    AmbiguousBranch,
    DivisionByNonUnit,
    IndexOutOfOrder,
    LogOfZero,
    NonZeroConstant,
    NotInvertible,
    RootOfZero,
)
from bicoef.series import EXACT, EXTENDED, Branch, Series1, Series2, arith, calculus, compose, extract, nth_root, revert, transcend


def t(order=8):
    return Series1.variable(order, 0, "theta")


def close(a, b, tol=1e-14):
    a = np.asarray([complex(x) for x in a])
    b = np.asarray([complex(x) for x in b])
    return np.max(np.abs(a - b)) <= tol * max(1.0, np.max(np.abs(b)))


# -- arithmetic -------------------------------------------------------------

def test_difference_of_squares():
    x = t(6)
    assert close(((1 + x) * (1 - x)).coeffs, [1, 0, -1, 0, 0, 0, 0])


def test_geometric_series():
    x = t(7)
    assert close((1 / (1 - x)).coeffs, [1] * 8)


def test_delannoy_series2_division():
    z = Series2.variable(0, (2, 2), 0, ("z", "w"))
    w = Series2.variable(1, (2, 2), 0, ("z", "w"))
    F = arith("div", Series2.constant(1, (2, 2), ("z", "w")), 1 - z - w - z * w)
    assert F.coeff(1, 1) == pytest.approx(3)
    assert np.allclose(F.coeffs, [[1, 1, 1], [1, 3, 5], [1, 5, 13]])


def test_mixed_order_truncates_to_minimum():
    a = Series1.variable(5, 0, "theta")
    b = Series1.variable(3, 0, "theta")
    assert (a + b).order == 3
    assert (a * b).order == 3


def test_division_by_non_unit():
    with pytest.raises(DivisionByNonUnit):
        Series1.constant(1, 4, "theta") / t(4)


def test_exact_context_keeps_fractions():
    x = Series1.variable(4, 0, "theta", EXACT)
    inv = 1 / (1 - x * 3)
    assert all(isinstance(c, type(inv.coeffs[0])) for c in inv.coeffs)
    assert inv.coeffs[4] == 81


# -- compose / revert -------------------------------------------------------

def test_compose_polynomials():
    x = Series1.variable(4, 0, "x")
    th = t(4)
    outer = 1 + x + x * x
    out = compose(Series1(outer.coeffs, "theta"), th + th * th)
    assert close(out.coeffs[:3], [1, 1, 2])


def test_compose_exp_of_i_theta():
    E = Series1([1 / math.factorial(k) for k in range(9)], "theta")
    out = E.compose(t(8) * 1j)
    assert close(out.coeffs, [1j ** k / math.factorial(k) for k in range(9)])


def test_compose_requires_zero_constant():
    with pytest.raises(NonZeroConstant):
        t(4).compose(1 + t(4))


def test_revert_examples():
    x = t(6)
    assert close(revert(x).coeffs, x.coeffs)
    assert close(revert(2 * x).coeffs, (x / 2).coeffs)
    assert close(revert(x + x * x).coeffs[:5], [0, 1, -1, 2, -5])
    S = x + 0.3 * x ** 2 - 0.1 * x ** 3
    assert close(revert(S).compose(S).coeffs, x.coeffs)


def test_revert_needs_linear_term():
    with pytest.raises(NotInvertible):
        revert(t(5) ** 2)


# -- transcendental ---------------------------------------------------------

def test_log_mercator():
    x = t(7)
    expect = [0] + [(-1) ** (k + 1) / k for k in range(1, 8)]
    assert close(transcend("log", 1 + x).coeffs, expect)
    assert close(transcend("exp", transcend("log", 1 + x)).coeffs, (1 + x).coeffs)


def test_log_of_zero():
    with pytest.raises(LogOfZero):
        t(4).log()


def test_roots():
    x = t(6)
    assert close(nth_root(1 + x, 2).coeffs[:3], [1, 0.5, -0.125])
    assert close(nth_root(Series1.constant(8, 3), 3).coeffs, [2, 0, 0, 0])
    T = 1 + 1j * x
    assert close(nth_root(T * T, 2, Branch.nearest(T.coeffs[0])).coeffs, T.coeffs)
    # nearest to -1 picks the other square root
    assert close(nth_root(T * T, 2, Branch.nearest(-1)).coeffs, (-T).coeffs)


def test_root_errors():
    with pytest.raises(RootOfZero):
        t(3).root(2)
    with pytest.raises(AmbiguousBranch):
        Series1.constant(1, 3).root(2, Branch.nearest(1j))
    with pytest.raises(ValueError):
        Branch.nearest(0)


# -- calculus / extract -----------------------------------------------------

def test_calculus():
    x = t(5)
    assert close(calculus("integrate", 1 + x).coeffs[:3], [0, 1, 0.5])
    d = calculus("differentiate", x ** 3)
    assert d.order == 4
    assert close(d.coeffs, [0, 0, 3, 0, 0])


def test_extract():
    x = t(5)
    assert extract(1 / (1 - x), coeff=2) == pytest.approx(1)
    assert extract(1 + x, at=0.5) == pytest.approx(1.5)
    with pytest.raises(IndexOutOfOrder):
        extract(x, coeff=9)
    z = Series2.variable(0, (3, 3), 0, ("z", "w"))
    w = Series2.variable(1, (3, 3), 0, ("z", "w"))
    F = 1 / (1 - z - w - z * w)
    assert extract(F, coeff=(1, 1)) == pytest.approx(3)


def test_extended_precision_beats_double():
    x = Series1.variable(30, 0, "theta", EXTENDED)
    s = (1 + x / 3).log().exp()
    err = max(abs(complex(a - b)) for a, b in zip(s.coeffs, (1 + x / 3).coeffs))
    assert err < 1e-25


def test_immutable():
    s = t(3)
    with pytest.raises(AttributeError):
        s.coeffs = None


# -- properties -------------------------------------------------------------

cplx = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


def series_from(coeffs):
    return Series1(np.array(coeffs, dtype=complex), "theta")


@settings(max_examples=60, deadline=None)
@given(st.lists(cplx, min_size=10, max_size=10), st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_exp_log_round_trip(tail, c0):
    S = series_from([c0] + tail)
    back = S.log().exp()
    assert np.max(np.abs(back.coeffs - S.coeffs)) <= 1e-12 * max(1.0, S.scale()) * max(1.0, 1 / abs(c0)) ** 10


@settings(max_examples=60, deadline=None)
@given(st.lists(cplx, min_size=9, max_size=9), st.complex_numbers(min_magnitude=0.5, max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_compose_revert_identity(tail, c1):
    S = series_from([0, c1] + tail)
    T = revert(S)
    ident = T.compose(S)
    # coefficients of the inverse grow geometrically; errors scale with them
    assert np.max(np.abs(ident.coeffs - t(10).coeffs)) <= 1e-10 * max(1.0, S.scale(), T.scale())


@settings(max_examples=60, deadline=None)
@given(st.lists(cplx, min_size=9, max_size=9), st.lists(cplx, min_size=8, max_size=8),
       st.complex_numbers(min_magnitude=0.5, max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_div_mul_round_trip(num, den_tail, d0):
    A = series_from(num)
    B = series_from([d0] + den_tail)
    back = (A / B) * B
    assert np.max(np.abs(back.coeffs - A.coeffs)) <= 1e-12 * max(1.0, (A / B).scale())


@settings(max_examples=60, deadline=None)
@given(st.lists(cplx, min_size=8, max_size=8), st.complex_numbers(min_magnitude=0.5, max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.integers(min_value=1, max_value=8))
def test_root_power_round_trip(tail, c0, n):
    S = series_from([c0] + tail)
    back = S.root(n) ** n
    assert np.max(np.abs(back.coeffs - S.coeffs)) <= 1e-10 * max(1.0, S.scale())
    assert abs(S.root(n).coeffs[0] - cmath.exp(cmath.log(c0) / n)) < 1e-12
