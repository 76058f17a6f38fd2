import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bicoef.errors import EvalBranch, EvalPole, ExprSyntaxError, NotAnalyticAtCenter, UnboundVariable
from bicoef.expr import BinOp, Call, Neg, Num, Pow, Var, diff, eval_scalar, evaluate, free_vars, is_rational, parse, taylor, to_text
from bicoef.series import EXACT, Series1, Series2


def test_parse_example_inputs():
    e = parse("1/(1-z-w-z*w)")
    assert free_vars(e) == {"z", "w"}
    assert is_rational(e)
    assert eval_scalar(parse("1-2*z"), {"z": 0.5}) == 0


def test_precedence_and_associativity():
    assert eval_scalar(parse("2-3-4"), {}) == -5
    assert eval_scalar(parse("8/4/2"), {}) == 1
    assert eval_scalar(parse("2*3^2"), {}) == 18
    assert eval_scalar(parse("-2^2"), {}) == -4
    assert eval_scalar(parse("2^-1"), {}) == 0.5
    assert eval_scalar(parse("(1+2)*3"), {}) == 9


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("1/((")
    assert info.value.offset == 4
    assert "offset 4" in str(info.value)
    for bad in ("1+", "z^1.5", "sin(z)", "2 z", ")", "z^w"):
        with pytest.raises(ExprSyntaxError):
            parse(bad)


def test_rational_constants_are_exact():
    e = parse("3/4 + 0.25")
    assert eval_scalar(e, {}, EXACT) == Fraction(1)
    assert isinstance(parse("0.1"), Num) and parse("0.1").value == Fraction(1, 10)


@settings(max_examples=100, deadline=None)
@given(st.deferred(lambda: exprs))
def test_printer_round_trips_random(e):
    once = parse(to_text(e))
    assert parse(to_text(once)) == once
    v = _safe_value(e)
    if v is not None:
        assert abs(eval_scalar(once, CENTER) - v) <= 1e-12 * max(1.0, abs(v))


def test_printer_round_trips():
    for text in ("1-z-w-z*w", "1/(1-z)", "-(z+w)^3", "exp(z/2)-sqrt(1-4*z)", "z-(w-z)", "z/(w*z)", "(z^2)^3"):
        e = parse(text)
        assert parse(to_text(e)) == e


def test_eval_errors():
    with pytest.raises(UnboundVariable):
        eval_scalar(parse("z+w"), {"z": 1})
    with pytest.raises(EvalPole):
        eval_scalar(parse("1/(1-z)"), {"z": 1})
    with pytest.raises(EvalBranch):
        eval_scalar(parse("log(z)"), {"z": 0})
    with pytest.raises(EvalBranch):
        eval_scalar(parse("sqrt(z)"), {"z": 0})


def test_delannoy_evaluations():
    H = parse("1-z-w-z*w")
    assert eval_scalar(H, {"z": 0, "w": 0}) == 1
    r = s = 1.0
    zeta = (math.sqrt(r * r + s * s) - s) / r
    assert abs(eval_scalar(H, {"z": zeta, "w": zeta})) < 1e-14


def test_taylor_examples():
    T = taylor(parse("1/(1-z)"), {"z": 0}, 3)
    assert isinstance(T, Series1)
    assert np.allclose(T.coeffs, [1, 1, 1, 1])
    F = taylor(parse("1/(1-z-w-z*w)"), {"z": 0, "w": 0}, (2, 2))
    assert isinstance(F, Series2)
    assert np.allclose(F.coeffs, [[1, 1, 1], [1, 3, 5], [1, 5, 13]])
    with pytest.raises(NotAnalyticAtCenter):
        taylor(parse("log(z)"), {"z": 0}, 4)
    with pytest.raises(NotAnalyticAtCenter):
        taylor(parse("1/z"), {"z": 0}, 4)


def test_taylor_of_constant_expression():
    T = taylor(parse("3"), {"z": 0.2, "w": 0.1}, (2, 2))
    assert T.coeff(0, 0) == 3 and T.coeff(1, 1) == 0


def test_array_evaluation_matches_scalar():
    e = parse("exp(z)*sqrt(1+w)/(2-z*w)")
    zs = np.array([0.1, 0.2 + 0.1j, -0.3])
    ws = np.array([0.4, -0.2, 0.1j])
    arr = evaluate(e, {"z": zs, "w": ws})
    for z, w, v in zip(zs, ws, arr):
        assert abs(v - eval_scalar(e, {"z": z, "w": w})) < 1e-15


def test_symbolic_diff():
    H = parse("1-z-w-z*w")
    assert eval_scalar(diff(H, "z"), {"z": 0.3, "w": 0.2}) == pytest.approx(-1.2)
    assert eval_scalar(diff(H, "w"), {"z": 0.3, "w": 0.2}) == pytest.approx(-1.3)
    e = parse("log(1+z^2)*exp(w)")
    assert eval_scalar(diff(e, "z"), {"z": 0.5, "w": 0}) == pytest.approx(2 * 0.5 / 1.25)


# -- random analytic expressions ---------------------------------------------

leaves = st.one_of(
    st.sampled_from([Var("z"), Var("w")]),
    st.fractions(min_value=-3, max_value=3, max_denominator=5).map(Num),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: BinOp(*t)),
        children.map(Neg),
        st.tuples(children, st.integers(-2, 3)).map(lambda t: Pow(*t)),
        st.tuples(st.sampled_from(["exp", "log", "sqrt"]), children).map(lambda t: Call(t[0], BinOp("+", Num(Fraction(2)), t[1]))),
    )


exprs = st.recursive(leaves, _extend, max_leaves=8)
CENTER = {"z": 0.3 + 0.1j, "w": -0.2 + 0.05j}


def _safe_value(e):
    try:
        v = eval_scalar(e, CENTER)
    except (EvalPole, EvalBranch, ZeroDivisionError, OverflowError):
        return None
    if not cmath.isfinite(v) or abs(v) > 1e6:
        return None
    return v


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_eval_matches_taylor_constant(e):
    v = _safe_value(e)
    assume(v is not None)
    try:
        T = taylor(e, CENTER, (3, 3))
    except NotAnalyticAtCenter:
        assume(False)
    assert abs(T.coeff(0, 0) - v) <= 1e-9 * max(1.0, abs(v))


@settings(max_examples=60, deadline=None)
@given(exprs)
def test_taylor_derivatives_match_finite_differences(e):
    v = _safe_value(e)
    assume(v is not None)
    try:
        T = taylor(e, CENTER, (2, 2))
    except NotAnalyticAtCenter:
        assume(False)
    h = 1e-5
    try:
        dz = (eval_scalar(e, {**CENTER, "z": CENTER["z"] + h}) - eval_scalar(e, {**CENTER, "z": CENTER["z"] - h})) / (2 * h)
        dw = (eval_scalar(e, {**CENTER, "w": CENTER["w"] + h}) - eval_scalar(e, {**CENTER, "w": CENTER["w"] - h})) / (2 * h)
    except (EvalPole, EvalBranch, ZeroDivisionError):
        assume(False)
    # skip points near singularities where the finite difference is unreliable
    assume(T.scale() < 1e4)
    for fd, coeff in ((dz, T.coeff(1, 0)), (dw, T.coeff(0, 1))):
        assert abs(fd - coeff) <= 1e-6 * max(1.0, abs(coeff))
