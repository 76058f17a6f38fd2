"""Derived amplitude a(zeta, theta) and phase f(zeta, theta).

On the circle ``z = zeta e^{i theta}`` with ``w = g(z)`` on the curve,

    a = -G(z, w) / (w H_w(z, w))
    f = log(w / g(zeta)) + i theta d(zeta)

where ``d = -zeta g'/g`` is the direction of ``zeta``. ``f`` vanishes to
order two at ``theta = 0`` by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    AmplitudeIdenticallyZero,
    OrderTooSmall,
    PhaseDegreeChange,
    PhaseLinearTermNonzero,
)
from .expr import evaluate
from .geometry import CriticalChart, _series_newton, direction, solve_on_curve
from .problem import Problem
from .series import STANDARD, Series1, Series2


@dataclass(frozen=True)
class LocalSeries:
    """Amplitude and phase as series in ``theta`` at a fixed point ``zeta``."""

    zeta: complex
    omega: complex
    d: complex
    a: Series1
    f: Series1


def _scalar_series(x, like: Series1):
    return x if isinstance(x, Series1) else Series1.constant(x, like.order, like.var, like.ctx)


def local_series(problem: Problem, ch: CriticalChart, zeta, order: int, tol: float = 1e-9) -> LocalSeries:
    """Series of ``a(zeta, .)`` and ``f(zeta, .)`` to ``theta``-order ``order``."""
    ch.check_radius(zeta)
    ctx = ch.ctx
    zeta = ctx.scalar(zeta)
    omega = solve_on_curve(problem, zeta, ch.omega(zeta), ctx)
    d = direction(ch, zeta)
    i = ctx.imag_unit
    theta = Series1.variable(order, 0, "theta", ctx)
    z = (theta * i).exp() * zeta
    W = _series_newton(problem, z, omega, ctx)
    env = {"z": z, "w": W}
    G = _scalar_series(evaluate(problem.G, env, ctx), W)
    Hw = _scalar_series(evaluate(problem.Hw, env, ctx), W)
    a = -G / (W * Hw)
    f = (W / omega).log() + theta * (i * d)
    sc = max(1.0, f.scale())
    if abs(f.coeffs[0]) > tol * sc or abs(f.coeffs[1]) > tol * sc:
        raise PhaseLinearTermNonzero(
            f"phase at zeta = {complex(zeta):.6g} has [theta^0], [theta^1] = "
            f"{complex(f.coeffs[0]):.3g}, {complex(f.coeffs[1]):.3g}"
        )
    coeffs = f.coeffs.copy()
    coeffs[0] = ctx.scalar(0)
    coeffs[1] = ctx.scalar(0)
    return LocalSeries(zeta, omega, d, a, Series1(coeffs, "theta", ctx))


def amplitude_at(problem: Problem, ch: CriticalChart, zeta, order: int) -> Series1:
    return local_series(problem, ch, zeta, order).a


def phase_at(problem: Problem, ch: CriticalChart, zeta, order: int) -> Series1:
    return local_series(problem, ch, zeta, order).f


@dataclass(frozen=True)
class DerivedPair:
    """Amplitude and phase as Series2 in ``(delta, theta)`` with their degrees.

    ``p`` is the generic vanishing order of the amplitude in ``theta`` near
    ``zeta_c``, ``q`` its order at ``zeta_c`` and ``n`` the (constant)
    vanishing order of the phase. ``u_c = [theta^n] f`` at ``zeta_c``.
    """

    a2: Series2
    f2: Series2
    p: int
    q: int
    n: int
    u_c: complex

    @property
    def change_of_degree(self) -> int:
        return self.q - self.p


def _identically_zero(col: Series1, tol, scale) -> bool:
    return all(abs(c) <= tol * scale for c in col.coeffs)


def _prefix_scales(s2: Series2):
    col_max = [max(abs(c) for c in s2.coeffs[:, j]) for j in range(s2.orders[1] + 1)]
    out, running = [], 0.0
    for m in col_max:
        running = max(running, float(m))
        out.append(running if running > 0 else 1.0)
    return out


def degrees(problem: Problem, ch: CriticalChart, orders=(12, 24), tol: float = 1e-9) -> DerivedPair:
    """Build ``a2, f2`` and classify the change of degree.

    ``orders = (delta_order, theta_order)``. A coefficient is "identically
    zero in delta" when all its delta-coefficients are at most ``tol`` times
    the largest coefficient of the series.
    """
    nd, nt = orders
    if ch.order < nd + nt:
        raise OrderTooSmall(f"chart order {ch.order} < delta_order + theta_order = {nd + nt}")
    # Degree classification only compares magnitudes against tol, so it runs
    # in standard precision whatever the chart's context.
    ctx = STANDARD
    i = ctx.imag_unit
    zeta_c = complex(ch.zeta_c)
    g = ch.g if ch.ctx.precision == "standard" else Series1([complex(c) for c in ch.g.coeffs], ch.g.var, ctx)
    vars2 = ("delta", "theta")
    zeta = Series2.variable(0, (nd, nt), zeta_c, vars2, ctx)
    theta1 = Series1.variable(nt, 0, "theta", ctx)
    e_it = Series2.from_series1((theta1 * i).exp(), 1, nd, vars2)
    z = zeta * e_it
    w = (z - zeta_c).substitute_into(g)
    env = {"z": z, "w": w}
    G = evaluate(problem.G, env, ctx)
    Hw = evaluate(problem.Hw, env, ctx)
    a2 = -G / (w * Hw)
    if not isinstance(a2, Series2):
        a2 = Series2.constant(a2, (nd, nt), vars2, ctx)

    g_delta = Series1(g.truncate(nd + 1).coeffs, "delta", ctx)
    delta1 = Series1.variable(nd, zeta_c, "delta", ctx)
    lam = -delta1 * g_delta.derivative() / g_delta.truncate(nd)
    g_delta = g_delta.truncate(nd)
    lam2 = Series2.from_series1(lam, 0, nt, vars2)
    g2 = Series2.from_series1(g_delta, 0, nt, vars2)
    theta2 = Series2.variable(1, (nd, nt), 0, vars2, ctx)
    f2 = (w / g2).log() + theta2 * lam2 * i

    # Per-column scales: column j is compared with the largest coefficient of
    # columns 0..j. The corner coefficients of a rectangular truncation grow
    # combinatorially and would swamp a single global scale.
    a_scale = _prefix_scales(a2)
    f_scale = _prefix_scales(f2)
    for j in (0, 1):
        if not _identically_zero(f2.col(j), tol, max(1.0, f_scale[min(j + 2, nt)])):
            raise PhaseLinearTermNonzero(f"[theta^{j}] f is not identically zero in delta")

    p = next((j for j in range(nt + 1) if not _identically_zero(a2.col(j), tol, a_scale[j])), None)
    if p is None:
        raise AmplitudeIdenticallyZero("amplitude vanishes identically to the computed order")
    q = next((j for j in range(p, nt + 1) if abs(a2.coeff(0, j)) > tol * a_scale[j]), None)
    if q is None or q >= nt - 2:
        raise OrderTooSmall(f"amplitude degree at zeta_c not interior to theta_order {nt}")
    n = next((j for j in range(2, nt + 1) if abs(f2.coeff(0, j)) > tol * f_scale[j]), None)
    if n is None or n >= nt - 2:
        raise OrderTooSmall(f"phase degree at zeta_c not interior to theta_order {nt}")
    for j in range(2, n):
        if not _identically_zero(f2.col(j), tol, f_scale[n]):
            raise PhaseDegreeChange(
                f"[theta^{j}] f vanishes at zeta_c but not identically: coalescing stationary points"
            )
    return DerivedPair(a2, f2, p, q, n, f2.coeff(0, n))
