import math

import numpy as np
import pytest

from bicoef.derived import amplitude_at, degrees, local_series, phase_at
from bicoef.errors import AmplitudeIdenticallyZero, OrderTooSmall, PhaseDegreeChange
from bicoef.geometry import critical_chart
from bicoef.problem import Problem, delannoy_problem, lagrange_problem
from bicoef.quadrature import CircleIntegrand

SQ2 = math.sqrt(2) - 1


@pytest.fixture(scope="module")
def dl():
    P = delannoy_problem()
    return P, critical_chart(P, SQ2)


@pytest.fixture(scope="module")
def lg():
    P = lagrange_problem()
    return P, critical_chart(P, 0.5)


def test_delannoy_local_series(dl):
    P, ch = dl
    a = amplitude_at(P, ch, 0.3, 12)
    assert a.coeffs[0] == pytest.approx(1 / 0.7, abs=1e-13)
    assert a.coeffs[1] == pytest.approx(0.3j / 0.49, abs=1e-13)
    f = phase_at(P, ch, 0.3, 12)
    assert f.coeffs[0] == 0 and f.coeffs[1] == 0
    assert f.coeffs[2] == pytest.approx(0.3 * 1.09 / 0.91 ** 2, abs=1e-13)


def test_delannoy_amplitude_is_geometric(dl):
    # a = 1/(1 - zeta e^{i theta}) for Delannoy
    P, ch = dl
    zeta = 0.35
    a = amplitude_at(P, ch, zeta, 16)
    th = 0.05
    assert a(th) == pytest.approx(1 / (1 - zeta * np.exp(1j * th)), abs=1e-13)


def test_lagrange_local_series(lg):
    P, ch = lg
    a = amplitude_at(P, ch, 0.5, 12)
    assert abs(a.coeffs[0]) < 1e-14
    assert a.coeffs[1] == pytest.approx(-1j, abs=1e-13)
    assert amplitude_at(P, ch, 0.4, 12).coeffs[0] == pytest.approx(0.2, abs=1e-14)
    assert phase_at(P, ch, 0.5, 12).coeffs[2] == pytest.approx(1.0, abs=1e-13)


def test_phase_has_no_constant_or_linear_term(dl, lg):
    for P, ch in (dl, lg):
        for zeta in (ch.zeta_c - 0.05, ch.zeta_c, ch.zeta_c + 0.07):
            f = phase_at(P, ch, zeta, 10)
            assert f.coeffs[0] == 0 and f.coeffs[1] == 0


def test_degrees_examples(dl, lg):
    d = degrees(*dl)
    assert (d.p, d.q, d.n) == (0, 0, 2)
    l = degrees(*lg)
    assert (l.p, l.q, l.n) == (0, 1, 2)
    P = Problem.from_text("1", "1-z-w")
    d2 = degrees(P, critical_chart(P, 0.5))
    assert (d2.p, d2.q, d2.n) == (0, 0, 2)


def test_two_degree_change():
    P = Problem.from_text("(1-2*z)^2", "1-z-w")
    d = degrees(P, critical_chart(P, 0.5))
    assert (d.p, d.q, d.n) == (0, 2, 2)


def test_lagrange_constant_column_is_linear(lg):
    d = degrees(*lg)
    col = d.a2.col(0).coeffs
    assert col[0] == pytest.approx(0, abs=1e-14)
    assert col[1] == pytest.approx(-2, abs=1e-13)
    assert np.max(np.abs(col[2:])) < 1e-12


def test_identically_zero_amplitude():
    P = Problem.from_text("1-z-w", "1-z-w")
    with pytest.raises(AmplitudeIdenticallyZero):
        degrees(P, critical_chart(P, 0.5))


def test_order_too_small(lg):
    with pytest.raises(OrderTooSmall):
        degrees(*lg, orders=(12, 3))


@pytest.mark.parametrize("delta", [-0.05, -0.02, 0.03, 0.05])
def test_slices_match_local_series(dl, lg, delta):
    for P, ch in (dl, lg):
        # delta_order 20 keeps the delta-truncation error of the slice below 1e-11 at |delta| = 0.05
        d = degrees(P, ch, orders=(20, 24))
        zeta = ch.zeta_c + delta
        local = local_series(P, ch, zeta, 16)
        a_slice = d.a2.at_first(delta)
        f_slice = d.f2.at_first(delta)
        for j in range(12):
            sc = max(1.0, local.a.scale())
            assert abs(a_slice.coeffs[j] - local.a.coeffs[j]) <= 1e-9 * sc
            sc = max(1.0, local.f.scale())
            assert abs(f_slice.coeffs[j] - local.f.coeffs[j]) <= 1e-9 * sc


@pytest.mark.parametrize("zeta", [0.3, 0.4, SQ2, 0.5])
def test_real_part_of_phase_positive(dl, zeta):
    P, ch = dl
    ci = CircleIntegrand(P, ch, zeta, 1.0)
    th = np.linspace(-1, 1, 201)
    th = th[th != 0]
    assert np.all(ci.f(th).real > 0)
