"""Adaptive Gauss-Kronrod (7-15) quadrature and the circle integral Sigma(zeta; s).

``Sigma(zeta; s) = int_{-eps}^{eps} exp(-s f(zeta, theta)) a(zeta, theta) d theta``
is the one-dimensional integral whose expansion the pipeline computes; for
``eps = pi`` it equals ``2 pi zeta^r omega^s [z^r w^s] F`` exactly when the
circle ``|z| = |zeta|`` carries no other pole.
"""

from __future__ import annotations

import heapq

import numpy as np

from .errors import PositivityProbeFailed, QuadratureNoConvergence
from .expr import evaluate
from .geometry import CriticalChart, direction, polish_on_curve, solve_on_curve, track_circle
from .problem import Problem
from .series import STANDARD

# 15-point Kronrod nodes (nonnegative half) and weights, with the embedded
# 7-point Gauss weights at the odd-indexed Kronrod nodes.
XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-XGK[:-1], XGK[::-1]])          # 15 nodes, ascending
_WK = np.concatenate([WGK[:-1], WGK[::-1]])
_WG = np.zeros(15)
_WG[[1, 3, 5]] = WG[:3]
_WG[[13, 11, 9]] = WG[:3]
_WG[7] = WG[3]


def gk15(func, a: float, b: float):
    """Kronrod estimate and ``|K - G|`` on ``[a, b]``; ``func`` takes an array."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.asarray(func(mid + half * _NODES), dtype=complex)
    k = half * np.dot(_WK, vals)
    g = half * np.dot(_WG, vals)
    return k, abs(k - g)


def adaptive_gk(func, a: float, b: float, abs_tol: float, rel_tol: float = 0.0, max_intervals: int = 4000):
    """Globally adaptive bisection until the summed error estimate meets the tolerance."""
    k, err = gk15(func, a, b)
    heap = [(-err, a, b, k)]
    total, total_err = k, err
    n = 1
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if n >= max_intervals:
            raise QuadratureNoConvergence(
                f"quadrature error {total_err:.3g} above tolerance after {n} intervals"
            )
        neg_err, lo, hi, kv = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        k1, e1 = gk15(func, lo, mid)
        k2, e2 = gk15(func, mid, hi)
        total += k1 + k2 - kv
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
        n += 1
    # resum to avoid drift from incremental updates
    total = sum(item[3] for item in heap)
    total_err = sum(-item[0] for item in heap)
    return total, total_err


def _check_positive(theta, re_f, eps):
    mask = np.abs(theta) > 1e-3 * eps
    if np.any(re_f[mask] <= 0):
        bad = theta[mask][np.argmin(re_f[mask])]
        raise PositivityProbeFailed(f"Re f <= 0 at theta = {bad:.6g}; the arc is not a descent contour")


def integrate_sigma(a_fn, f_fn, s: float, eps: float, tol: float | None = None, probe: int = 401) -> complex:
    """``int_{-eps}^{eps} exp(-s f(theta)) a(theta) d theta`` for vectorized ``a_fn``, ``f_fn``.

    ``tol`` is absolute; the default is ``1e-10`` times the integrand peak
    on a probe grid.
    """
    grid = np.linspace(-eps, eps, probe)
    fg = np.asarray(f_fn(grid), dtype=complex)
    _check_positive(grid, fg.real, eps)

    def integrand(t):
        return np.exp(-s * np.asarray(f_fn(t), dtype=complex)) * np.asarray(a_fn(t), dtype=complex)

    if tol is None:
        tol = 1e-10 * float(np.max(np.abs(integrand(grid))))
    value, _ = adaptive_gk(integrand, -eps, eps, tol)
    return complex(value)


class CircleIntegrand:
    """Direct evaluation of ``a(zeta, theta)`` and ``f(zeta, theta)`` on the circle.

    ``w(theta)`` is continued along a fine grid from ``w(0) = omega``; each
    evaluation seeds Newton from the interpolated continuation, and the
    logarithm branch is chosen next to the continued argument.
    """

    def __init__(self, problem: Problem, ch: CriticalChart, zeta, eps: float, grid_points: int = 801):
        self.problem = problem
        self.zeta = complex(zeta)
        self.omega = complex(solve_on_curve(problem, self.zeta, ch.omega(self.zeta)))
        self.d = complex(direction(ch, self.zeta))
        self.eps = float(eps)
        self.grid = np.linspace(-eps, eps, grid_points)
        self.w_grid = track_circle(problem, self.zeta, self.omega, self.grid)
        self.arg_grid = np.unwrap(np.angle(self.w_grid / self.omega))

    def w(self, theta):
        theta = np.asarray(theta, dtype=float)
        seeds = np.interp(theta, self.grid, self.w_grid.real) + 1j * np.interp(theta, self.grid, self.w_grid.imag)
        return polish_on_curve(self.problem, self.zeta * np.exp(1j * theta), seeds)

    def _f_from_w(self, theta, w):
        ratio = w / self.omega
        arg = np.angle(ratio)
        target = np.interp(theta, self.grid, self.arg_grid)
        arg = arg + 2 * np.pi * np.round((target - arg) / (2 * np.pi))
        return np.log(np.abs(ratio)) + 1j * arg + 1j * theta * self.d

    def _a_from_w(self, theta, w):
        z = self.zeta * np.exp(1j * theta)
        env = {"z": z, "w": w}
        G = np.broadcast_to(evaluate(self.problem.G, env, STANDARD, pole_tol=0.0), w.shape)
        Hw = np.broadcast_to(evaluate(self.problem.Hw, env, STANDARD, pole_tol=0.0), w.shape)
        return -G / (w * Hw)

    def a(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self._a_from_w(theta, self.w(theta))

    def f(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self._f_from_w(theta, self.w(theta))

    def integrand(self, s: float):
        def func(theta):
            theta = np.asarray(theta, dtype=float)
            w = self.w(theta)
            return np.exp(-s * self._f_from_w(theta, w)) * self._a_from_w(theta, w)
        return func


def sigma_quadrature(ch: CriticalChart, problem: Problem, zeta, s: float, eps: float = 1.0, tol: float | None = None) -> complex:
    """``Sigma(zeta; s) = int_{-eps}^{eps} exp(-s f) a d theta`` by adaptive Gauss-Kronrod.

    ``tol`` is absolute and defaults to ``1e-10`` times the integrand peak.
    """
    ci = CircleIntegrand(problem, ch, zeta, eps)
    re_f = ci._f_from_w(ci.grid, ci.w_grid).real
    _check_positive(ci.grid, re_f, eps)
    func = ci.integrand(s)
    if tol is None:
        tol = 1e-10 * float(np.max(np.abs(func(ci.grid))))
    value, _ = adaptive_gk(func, -eps, eps, tol)
    return complex(value)
