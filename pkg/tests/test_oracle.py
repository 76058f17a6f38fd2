import math
from fractions import Fraction

import pytest

from bicoef.errors import CacheFormatError, NotAnalyticAtOrigin, OracleMissing
from bicoef.expansion import Analysis
from bicoef.oracle import (
    cached_table,
    cleared_form,
    coeff_table,
    compare,
    convolution_residual,
    delannoy,
    hf_residual,
    lagrange_diagonal,
    lagrange_exact,
    load_table,
    save_table,
)
from bicoef.problem import Problem, delannoy_problem, lagrange_problem

SQ2 = math.sqrt(2) - 1


def binomial_series_coeff(r, s):
    """[x^r] (1-x)^{-s} (1-2x) by direct expansion."""
    c = lambda k: math.comb(s + k - 1, k)
    return c(r) - 2 * c(r - 1) if r >= 1 else c(0)


def test_delannoy_values():
    assert delannoy(1, 1) == 3
    assert delannoy(2, 2) == 13
    assert delannoy(3, 3) == 63
    assert all(delannoy(0, s) == 1 for s in range(6))
    central = lambda n: sum(math.comb(n, k) ** 2 * 2 ** k for k in range(n + 1))
    assert delannoy(20, 20) == central(20) == 260543813797441


def test_lagrange_values():
    assert lagrange_exact(2, 2).exact == -1
    assert lagrange_exact(4, 3).exact == -5
    # r = 0 is the constant term 1; the identity covers s >= 2
    assert lagrange_exact(0, 1).exact == 1
    assert all(lagrange_exact(s - 1, s).exact == 0 for s in range(2, 60))
    assert all(lagrange_exact(r, r).exact == lagrange_diagonal(r) for r in range(1, 60))
    for r in range(0, 12):
        for s in range(1, 12):
            assert lagrange_exact(r, s).exact == binomial_series_coeff(r, s)
    big = lagrange_exact(300, 301)
    assert big.exact == 0 and big.sign == 0
    big = lagrange_exact(300, 300)
    assert big.exact is None and big.sign == -1
    assert big.log_modulus == pytest.approx(math.log(-lagrange_diagonal(300)), rel=1e-12)


def test_delannoy_table():
    P = delannoy_problem()
    T = coeff_table(P, 40, 40)
    assert T.precision == "exact"
    assert T(2, 2) == 13 and T(3, 3) == 63
    assert all(T(r, s) == delannoy(r, s) for r in range(41) for s in range(41))
    assert convolution_residual(P, T) == 0


def test_lagrange_table():
    P = lagrange_problem()
    T = coeff_table(P, 60, 60)
    assert T(4, 3) == -5
    for r in range(61):
        for s in range(1, 61 - r):
            assert T(r, s) == lagrange_exact(r, s).exact
    assert convolution_residual(P, T) == 0


def test_trivial_table():
    P = Problem.from_text("1-z-w", "1-z-w")
    T = coeff_table(P, 4, 4)
    assert T(0, 0) == 1
    assert all(T(r, s) == 0 for r in range(5) for s in range(5) if (r, s) != (0, 0))


def test_fraction_table():
    P = Problem.from_text("1", "2-z-w")
    T = coeff_table(P, 3, 3)
    assert T(1, 1) == Fraction(2, 8)
    assert convolution_residual(P, T) == 0


def test_cleared_form_of_lagrange():
    P, Q = cleared_form(lagrange_problem())
    # F = (1-2z)(1-z) / (1-z-w)
    assert P == {(0, 0): 1, (1, 0): -3, (2, 0): 2}
    assert Q == {(0, 0): 1, (1, 0): -1, (0, 1): -1}


def test_not_analytic_at_origin():
    with pytest.raises(NotAnalyticAtOrigin):
        coeff_table(Problem.from_text("1", "z+w"), 3, 3)
    with pytest.raises(NotAnalyticAtOrigin):
        coeff_table(Problem.from_text("1", "log(w+z)"), 3, 3)


def test_extended_table_for_transcendental_problem():
    P = Problem.from_text("exp(z)", "1-w*exp(z)")
    T = coeff_table(P, 6, 6)
    assert T.precision == "extended"
    # [z^r w^s] exp(z)^{s+1} = (s+1)^r / r!
    for r in range(7):
        for s in range(7):
            assert abs(complex(T(r, s)) - (s + 1) ** r / math.factorial(r)) < 1e-14
    assert hf_residual(P, T) < 1e-20


def test_cache_round_trip(tmp_path):
    P = lagrange_problem()
    T = coeff_table(P, 10, 10)
    path = tmp_path / "lag.table"
    save_table(path, T, P.mode)
    back = load_table(path, P.digest())
    assert back.values == T.values
    with pytest.raises(CacheFormatError):
        load_table(path, delannoy_problem().digest())
    path.write_text("garbage\n")
    with pytest.raises(CacheFormatError):
        load_table(path)
    E = Problem.from_text("exp(z)", "1-w")
    TE = coeff_table(E, 4, 4)
    save_table(tmp_path / "e.table", TE)
    back = load_table(tmp_path / "e.table")
    assert all(abs(back(r, s) - TE(r, s)) < 1e-30 for r in range(5) for s in range(5))


def test_cached_table_reuses_file(tmp_path):
    P = delannoy_problem()
    T1 = cached_table(P, 12, 12, tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    T2 = cached_table(P, 8, 8, tmp_path)
    assert T2.R == 12 and T2(8, 8) == T1(8, 8)


def test_compare_reports():
    A = Analysis(delannoy_problem(), SQ2)
    reps = [A.leading_order(s, s) for s in range(10, 101, 10)]
    rep = compare(reps, delannoy)
    errs = [row.rel_err for row in rep.rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert rep.trend < 0
    assert rep.max == errs[0] and rep.median is not None
    assert all(row.floor > 0 and row.rel_err >= 0 for row in rep.rows)


def test_compare_handles_zero_exact():
    A = Analysis(lagrange_problem(), 0.5)
    rep = compare([A.estimate(49, 50), A.estimate(199, 200)], lagrange_exact)
    for row in rep.rows:
        assert row.exact == 0
        assert row.verdict
        assert abs(row.estimate) <= 0.05 * row.floor


def test_compare_empty_and_missing():
    rep = compare([], delannoy)
    assert rep.rows == [] and rep.max is None and rep.median is None and rep.trend is None
    A = Analysis(delannoy_problem(), SQ2)
    T = coeff_table(delannoy_problem(), 5, 5)
    with pytest.raises(OracleMissing):
        compare([A.estimate(20, 20)], T)
