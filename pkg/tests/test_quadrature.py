import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.special import erf

from bicoef.errors import PositivityProbeFailed, QuadratureNoConvergence
from bicoef.geometry import critical_chart, solve_direction
from bicoef.oracle import delannoy
from bicoef.problem import delannoy_problem
from bicoef.quadrature import WG, WGK, XGK, adaptive_gk, gk15, integrate_sigma, sigma_quadrature

SQ2 = math.sqrt(2) - 1


@pytest.fixture(scope="module")
def dl():
    P = delannoy_problem()
    return P, critical_chart(P, SQ2)


def test_gauss_part_matches_legendre():
    x, w = leggauss(7)
    pos = x >= 0
    assert np.allclose(sorted(x[pos], reverse=True), XGK[1::2], atol=1e-15)
    assert np.allclose(sorted(w[pos]), sorted(WG), atol=1e-15)


def test_kronrod_exact_to_degree_22():
    for deg in range(23):
        k, _ = gk15(lambda t: t ** deg, -1.0, 1.0)
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert abs(k - exact) < 1e-14
    assert sum(WGK[:-1]) * 2 + WGK[-1] == pytest.approx(2.0, abs=1e-15)


def test_adaptive_oscillatory():
    val, err = adaptive_gk(lambda t: np.exp(1j * 40 * t), 0.0, math.pi, 1e-12)
    exact = (np.exp(1j * 40 * math.pi) - 1) / (40j)
    assert abs(val - exact) < 1e-11


def test_adaptive_gives_up():
    with pytest.raises(QuadratureNoConvergence):
        adaptive_gk(lambda t: 1 / np.sqrt(np.abs(t - 0.3) + 1e-300), 0.0, 1.0, 1e-14, max_intervals=20)


def test_gaussian_integral():
    val = integrate_sigma(lambda t: np.ones_like(t), lambda t: t ** 2, 100, 0.5)
    exact = math.sqrt(math.pi / 100) * erf(0.5 * 10)
    assert abs(val - exact) <= 1e-10


def test_positivity_probe():
    with pytest.raises(PositivityProbeFailed):
        integrate_sigma(lambda t: np.ones_like(t), lambda t: t ** 2 - t ** 4, 10, 1.5)


def test_circle_identity_at_matched_direction(dl):
    P, ch = dl
    s = 80
    r = round(2 * 0.4 / (1 - 0.16) * s)
    pt = solve_direction(ch, r / s)
    sigma = sigma_quadrature(ch, P, pt.zeta, s, eps=1.0)
    exact = 2 * math.pi * pt.zeta ** r * pt.omega ** s * delannoy(r, s)
    assert abs(exact - sigma) <= 1e-6 * abs(sigma)


def test_full_circle_is_exact(dl):
    P, ch = dl
    pt = solve_direction(ch, 30 / 40)
    sigma = sigma_quadrature(ch, P, pt.zeta, 40, eps=math.pi)
    exact = 2 * math.pi * pt.zeta ** 30 * pt.omega ** 40 * delannoy(30, 40)
    assert abs(exact - sigma) <= 1e-12 * abs(sigma)


def test_eps_stability(dl):
    P, ch = dl
    base = sigma_quadrature(ch, P, 0.4, 100, eps=1.0)
    for eps in (0.8, 1.2):
        assert abs(sigma_quadrature(ch, P, 0.4, 100, eps=eps) - base) <= 1e-8 * abs(base)


def test_width_scaling(dl):
    P, ch = dl
    ratio = sigma_quadrature(ch, P, 0.4, 400, eps=1.0) / sigma_quadrature(ch, P, 0.4, 200, eps=1.0)
    assert abs(ratio - 2 ** -0.5) <= 0.02 * 2 ** -0.5
