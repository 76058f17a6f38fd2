"""The singular variety H = 0 near a strictly minimal simple zero.

A :class:`CriticalChart` stores the implicit branch ``w = g(z)`` through
``(zeta_c, omega_c)`` as a Taylor series in ``t = z - zeta_c``. Directions
``lambda = r/s`` are mapped to points of the curve by Newton continuation
from ``zeta_c``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChartRadiusExceeded,
    CrossCheckFailed,
    DegenerateChart,
    DivisionByNonUnit,
    EvalPole,
    NoConvergence,
    NonSimple,
    OutOfCone,
)
from .expr import evaluate
from .problem import Problem
from .series import STANDARD, Context, Series1

NEWTON_MAX_ITER = 50


def _eval(e, z, w, ctx=STANDARD):
    return evaluate(e, {"z": z, "w": w}, ctx)


def solve_on_curve(problem: Problem, z, w_seed, ctx: Context = STANDARD, tol: float = 1e-12):
    """Newton refinement of ``w`` onto ``H(z, w) = 0`` at fixed ``z``."""
    z = ctx.scalar(z)
    w = ctx.scalar(w_seed)
    eps = 1e-15 if not ctx.extended else 1e-30
    for _ in range(NEWTON_MAX_ITER):
        h = _eval(problem.H, z, w, ctx)
        hw = _eval(problem.Hw, z, w, ctx)
        if abs(hw) == 0:
            raise NonSimple(f"H_w vanishes at (z, w) = ({complex(z):.6g}, {complex(w):.6g})")
        step = h / hw
        w = w - step
        if abs(step) <= eps * max(1.0, abs(w)):
            break
    else:
        raise NoConvergence(f"Newton for H(z, w) = 0 at z = {complex(z):.6g} did not converge")
    h = _eval(problem.H, z, w, ctx)
    hw = _eval(problem.Hw, z, w, ctx)
    scale = max(1.0, abs(w * hw))
    if abs(h) > 1e-13 * scale:
        raise NoConvergence(f"residual |H| = {abs(h):.3g} after Newton")
    if abs(hw) * max(1.0, abs(w)) < tol:
        raise NonSimple(f"|H_w| = {abs(hw):.3g} at the solution")
    return w


def _series_newton(problem: Problem, z_series: Series1, w0, ctx: Context) -> Series1:
    """Series solution ``W`` of ``H(z_series, W) = 0`` with ``W(0) = w0``."""
    order = z_series.order
    W = Series1.constant(w0, order, z_series.var, ctx)
    env = {"z": z_series}
    prec = 1
    for _ in range(max(1, order).bit_length() + 3):
        env["w"] = W
        h = evaluate(problem.H, env, ctx)
        hw = evaluate(problem.Hw, env, ctx)
        if not isinstance(hw, Series1):
            hw = Series1.constant(hw, order, z_series.var, ctx)
        if not isinstance(h, Series1):
            h = Series1.constant(h, order, z_series.var, ctx)
        step = h / hw
        W = W - step
        prec *= 2
        if prec > order and step.scale() <= 1e-15 * max(1.0, W.scale()):
            break
    return W


def empirical_radius(s: Series1) -> float:
    """Root-test estimate of the radius of convergence from the upper half of ``s``.

    Returns ``inf`` when the upper coefficients are negligible (polynomial
    or very fast decay).
    """
    N = s.order
    mags = np.abs(np.array([complex(c) for c in s.coeffs]))
    scale = mags.max()
    ks = [k for k in range(max(1, N // 2), N + 1) if mags[k] > 1e-14 * scale]
    if len(ks) < 3:
        return math.inf
    ks = np.array(ks, dtype=float)
    slope = np.polyfit(ks, np.log(mags[ks.astype(int)]), 1)[0]
    if slope >= 0:
        return math.exp(-slope) if slope > -1e-12 else math.inf
    return math.exp(-slope)


@dataclass(frozen=True)
class CriticalChart:
    problem: Problem
    zeta_c: complex
    omega_c: complex
    g: Series1
    Hz_c: complex
    Hw_c: complex
    radius: float
    ctx: Context = STANDARD

    @property
    def order(self) -> int:
        return self.g.order

    def check_radius(self, zeta):
        delta = abs(complex(zeta) - complex(self.zeta_c))
        if delta > 0.5 * self.radius:
            raise ChartRadiusExceeded(
                f"|zeta - zeta_c| = {delta:.4g} exceeds half the chart radius {self.radius:.4g}"
            )

    def g_derivs(self, zeta):
        """``g, g', g''`` at ``zeta`` from the chart series."""
        t = self.ctx.scalar(zeta) - self.ctx.scalar(self.zeta_c)
        d1 = self.g.derivative()
        d2 = d1.derivative()
        return self.g(t), d1(t), d2(t)

    def omega(self, zeta):
        self.check_radius(zeta)
        return self.g_derivs(zeta)[0]


def chart(problem: Problem, zeta_c, omega_c, order: int = 48, ctx: Context = STANDARD, tol=1e-12) -> CriticalChart:
    """Series parametrization ``w = g(z)`` of ``H = 0`` about ``(zeta_c, omega_c)``."""
    zeta_c = ctx.scalar(zeta_c)
    omega_c = ctx.scalar(omega_c)
    h = _eval(problem.H, zeta_c, omega_c, ctx)
    hw = _eval(problem.Hw, zeta_c, omega_c, ctx)
    hz = _eval(problem.Hz, zeta_c, omega_c, ctx)
    scale = max(1.0, abs(hw * omega_c), abs(hz * zeta_c))
    if abs(hw) <= tol * scale:
        raise NonSimple(f"|H_w(zeta_c, omega_c)| = {abs(hw):.3g} <= tol")
    if abs(h) > 1e-10 * scale:
        raise NonSimple(f"(zeta_c, omega_c) is not on H = 0 (|H| = {abs(h):.3g})")
    if abs(zeta_c) <= tol or abs(omega_c) <= tol:
        raise DegenerateChart("zeta_c * omega_c must be nonzero")
    # Solve in the scaled variable tau = t/rho so the coefficients stay O(1)
    # even when the chart radius is small; shrink rho if division still fails.
    rho = max(abs(zeta_c), 1e-3)
    for _ in range(12):
        arr = ctx.zeros(order + 1)
        arr[0] = zeta_c
        if order >= 1:
            arr[1] = ctx.scalar(rho)
        try:
            G = _series_newton(problem, Series1(arr, "t", ctx), omega_c, ctx)
            break
        except DivisionByNonUnit:
            rho /= 4
    else:
        raise DegenerateChart("series Newton for the chart failed at every scale")
    powers = ctx.array([ctx.scalar(rho) ** -k for k in range(order + 1)])
    g = Series1(G.coeffs * powers, "t", ctx)
    return CriticalChart(problem, zeta_c, omega_c, g, hz, hw, empirical_radius(G) * rho, ctx)


def critical_chart(problem: Problem, zeta_c, omega_c=None, order: int = 48, ctx: Context = STANDARD):
    """Chart at ``zeta_c``, solving for ``omega_c`` when it is not given.

    Without a seed, Newton is started from several points and the root of
    smallest modulus is kept (the candidate for a minimal zero).
    """
    if omega_c is None:
        roots = []
        for seed in (0.5, 1.0, 0.1, 2.0, -0.5, 0.5j, -0.5j, 5.0):
            try:
                roots.append(solve_on_curve(problem, zeta_c, seed, ctx))
            except (NoConvergence, NonSimple, EvalPole, ZeroDivisionError, OverflowError):
                continue
        if not roots:
            raise NoConvergence(f"no zero of H(zeta_c, w) found at zeta_c = {zeta_c}")
        omega_c = min(roots, key=lambda w: abs(w))
    else:
        omega_c = solve_on_curve(problem, zeta_c, omega_c, ctx)
    return chart(problem, zeta_c, omega_c, order, ctx)


def direction(ch: CriticalChart, zeta, cross_check: bool = True):
    """``d(zeta) = -zeta g'(zeta)/g(zeta)``, cross-checked against ``zeta H_z/(omega H_w)``."""
    ch.check_radius(zeta)
    zeta = ch.ctx.scalar(zeta)
    g0, g1, _ = ch.g_derivs(zeta)
    d = -zeta * g1 / g0
    if cross_check:
        hz = _eval(ch.problem.Hz, zeta, g0, ch.ctx)
        hw = _eval(ch.problem.Hw, zeta, g0, ch.ctx)
        d_direct = zeta * hz / (g0 * hw)
        if abs(d - d_direct) > 1e-9 * max(1.0, abs(d)):
            raise CrossCheckFailed(f"direction from chart {complex(d):.12g} vs direct {complex(d_direct):.12g}")
    return d


@dataclass(frozen=True)
class DirectionPoint:
    lam: float
    zeta: complex
    omega: complex


def solve_direction(ch: CriticalChart, lam: float, cone=None, tol: float = 1e-11) -> DirectionPoint:
    """Point ``zeta(lambda)`` of the branch through ``zeta_c`` with ``d(zeta) = lambda``."""
    if not lam > 0:
        raise OutOfCone(f"direction lambda = {lam} must be positive")
    if cone is not None and not cone[0] <= lam <= cone[1]:
        raise OutOfCone(f"lambda = {lam} outside the configured cone {cone}")
    ctx = ch.ctx
    zc = ctx.scalar(ch.zeta_c)
    z = zc

    def resid_and_slope(z):
        g0, g1, g2 = ch.g_derivs(z)
        d = -z * g1 / g0
        dd = -g1 / g0 - z * (g2 * g0 - g1 * g1) / (g0 * g0)
        return d - lam, dd

    r, dr = resid_and_slope(z)
    for _ in range(NEWTON_MAX_ITER):
        if abs(r) <= tol * max(1.0, abs(lam)):
            break
        if abs(dr) == 0:
            raise NoConvergence("direction map is stationary; cannot invert d(zeta)")
        step = r / dr
        damping = 1.0
        for _ in range(30):
            trial = z - damping * step
            if abs(complex(trial) - complex(zc)) > 0.5 * ch.radius:
                damping *= 0.5
                continue
            r_new, dr_new = resid_and_slope(trial)
            if abs(r_new) < abs(r) or abs(r_new) <= tol:
                break
            damping *= 0.5
        else:
            raise OutOfCone(f"lambda = {lam}: Newton for zeta(lambda) leaves the chart region")
        z, r, dr = trial, r_new, dr_new
    else:
        raise NoConvergence(f"zeta(lambda) for lambda = {lam} did not converge")
    if abs(complex(z) - complex(zc)) > 0.5 * ch.radius:
        raise OutOfCone(f"lambda = {lam}: zeta({lam}) lies outside the chart region")
    omega = solve_on_curve(ch.problem, z, ch.g_derivs(z)[0], ctx)
    return DirectionPoint(float(lam), z, omega)


def track_circle(problem: Problem, zeta, omega, thetas, ctx: Context = STANDARD, substeps: int = 8):
    """``w(theta)`` on ``H(zeta e^{i theta}, w) = 0`` continued from ``w(0) = omega``.

    ``thetas`` must be sorted; continuation runs outwards from 0 in both
    directions on a refined grid, then every requested node is polished by
    vectorized Newton.
    """
    thetas = np.asarray(thetas, dtype=float)
    zeta = complex(zeta)
    omega = complex(omega)
    lo, hi = min(0.0, thetas.min()), max(0.0, thetas.max())
    span = max(hi - lo, 1e-12)
    m = max(64, int(substeps * len(thetas)))
    h = span / m

    def walk(end):
        n_steps = max(1, int(math.ceil(abs(end) / h)))
        grid = np.linspace(0.0, end, n_steps + 1)
        ws = np.empty(grid.size, dtype=complex)
        ws[0] = omega
        prev = omega
        for i in range(1, grid.size):
            seed = prev if i < 2 else 2 * ws[i - 1] - ws[i - 2]
            ws[i] = solve_on_curve(problem, zeta * cmath.exp(1j * grid[i]), seed, STANDARD)
            prev = ws[i]
        return grid, ws

    g_pos, w_pos = walk(hi) if hi > 0 else (np.array([0.0]), np.array([omega]))
    g_neg, w_neg = walk(lo) if lo < 0 else (np.array([0.0]), np.array([omega]))
    grid = np.concatenate([g_neg[::-1], g_pos[1:]])
    wgrid = np.concatenate([w_neg[::-1], w_pos[1:]])
    seeds = np.interp(thetas, grid, wgrid.real) + 1j * np.interp(thetas, grid, wgrid.imag)
    return polish_on_curve(problem, zeta * np.exp(1j * thetas), seeds)


def polish_on_curve(problem: Problem, z, w, iters: int = 30):
    """Vectorized Newton on ``H(z, w) = 0`` for arrays of points."""
    z = np.asarray(z, dtype=complex)
    w = np.array(w, dtype=complex)
    for _ in range(iters):
        h = evaluate(problem.H, {"z": z, "w": w}, STANDARD, pole_tol=0.0)
        hw = evaluate(problem.Hw, {"z": z, "w": w}, STANDARD, pole_tol=0.0)
        h = np.broadcast_to(h, w.shape)
        hw = np.broadcast_to(hw, w.shape)
        step = h / hw
        w = w - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(w))):
            break
    return w


@dataclass(frozen=True)
class MinimalityReport:
    ok: bool
    margin: float
    circle_margin: float
    boundary_min_abs_H: float
    zero_counts_ok: bool


def minimality_probe(ch: CriticalChart, zeta, M: int = 64, eta: float = 0.02) -> MinimalityReport:
    """Numerical evidence that ``(zeta, g(zeta))`` is a strictly minimal zero.

    Three samples are taken: the margin ``|g(zeta e^{i theta})| - |g(zeta)|``
    on a uniform circle grid (``theta != 0``), ``min |H|`` on a coarse grid of
    the distinguished boundary away from the zero, and argument-principle
    zero counts of ``H(z, .)`` inside ``|w| < (1 - eta)|omega|`` for ``z``
    in the closed disk. This is a probe, not a proof.
    """
    if M < 16:
        raise ValueError("minimality_probe needs M >= 16")
    problem = ch.problem
    zeta = complex(zeta)
    try:
        omega = complex(solve_on_curve(problem, zeta, ch.omega(zeta)))
    except (NoConvergence, NonSimple, ChartRadiusExceeded):
        return MinimalityReport(False, -math.inf, -math.inf, 0.0, False)
    thetas = 2 * math.pi * np.arange(1, M) / M - math.pi
    thetas = thetas[np.abs(thetas) > 1e-12]
    try:
        ws = track_circle(problem, zeta, omega, np.sort(thetas))
        circle = np.abs(ws) - abs(omega)
        circle_margin = float(circle.min())
    except (NoConvergence, NonSimple, EvalPole, ZeroDivisionError):
        circle_margin = -math.inf

    # |H| on the torus |z| = |zeta|, |w| = |omega|, excluding the arc near the zero
    phis = 2 * math.pi * np.arange(M) / M
    Z = abs(zeta) * np.exp(1j * (phis + cmath.phase(zeta)))[:, None]
    W = abs(omega) * np.exp(1j * (phis + cmath.phase(omega)))[None, :]
    near = (np.abs(np.angle(Z / zeta)) < 4 * math.pi / M) & (np.abs(np.angle(W / omega)) < 4 * math.pi / M)
    try:
        Hvals = np.abs(np.broadcast_to(evaluate(problem.H, {"z": Z, "w": W}, STANDARD, pole_tol=0.0), near.shape))
        boundary_min = float(np.min(np.where(near, np.inf, Hvals)))
    except (EvalPole, ZeroDivisionError):
        boundary_min = 0.0

    # zero counts of H(z, .) in |w| < (1-eta)|omega| for z on a polar grid of the disk
    counts_ok = True
    radii = abs(zeta) * np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    K = 256
    ring = (1 - eta) * abs(omega) * np.exp(2j * math.pi * np.arange(K + 1) / K)
    for rad in radii:
        n_ang = 1 if rad == 0 else 16
        for ang in 2 * math.pi * np.arange(n_ang) / n_ang:
            z = rad * cmath.exp(1j * ang)
            try:
                hv = np.broadcast_to(evaluate(problem.H, {"z": z, "w": ring}, STANDARD, pole_tol=0.0), ring.shape)
            except (EvalPole, ZeroDivisionError):
                counts_ok = False
                continue
            if np.any(hv == 0) or not np.all(np.isfinite(hv)):
                counts_ok = False
                continue
            winding = np.sum(np.angle(hv[1:] / hv[:-1])) / (2 * math.pi)
            if abs(winding) > 0.5:
                counts_ok = False

    margin = circle_margin
    ok = bool(circle_margin > 0 and boundary_min > 0 and counts_ok)
    return MinimalityReport(ok, margin, circle_margin, boundary_min, counts_ok)
