"""Stationary-phase expansion and the assembled coefficient estimate.

With ``f = beta^n`` (principal n-th root) and the canonical change of
variable ``alpha``, the Fourier-Laplace integral

    Sigma(zeta; s) = int e^{-s f(theta)} a(theta) d theta

expands as ``sum_k A_k B_k(s)`` with

    B_k(s) = sum_{j=k}^{J} c_k(j) (1 + (-1)^j D(j, n)) (1/n) Gamma((j+1)/n) s^{-(j+1)/n},
    c_k(j) = [beta^j] alpha^k d alpha / d beta,

and ``[z^r w^s] F ~ zeta^{-r} omega^{-s} / (2 pi) * Sigma``.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass

import numpy as np

from .canonical import CanonicalRep, canonical_at_center, canonical_rep
from .derived import DerivedPair, LocalSeries, degrees, local_series
from .errors import (
    BranchFailure,
    DegreeMismatch,
    NonPositiveArgument,
    NotApplicable,
    NotConstantDegree,
    OrderTooSmall,
    SignUndefined,
)
from .geometry import CriticalChart, DirectionPoint, critical_chart, solve_direction
from .problem import Config, Problem
from .series import Series1

LOG_VALUE_LIMIT = 700.0


def gamma_real(x: float) -> float:
    """Gamma function for real ``x > 0``."""
    if not x > 0:
        raise NonPositiveArgument(f"gamma_real needs x > 0, got {x}")
    return math.gamma(x)


def phase_sign(u_c, n: int, tol: float = 1e-6):
    """``sign(Re(i u_c))`` for odd ``n``; ``None`` for even ``n``."""
    if n % 2 == 0:
        return None
    v = 1j * complex(u_c)
    if abs(v.imag) > tol * abs(v) or v.real == 0:
        raise SignUndefined(f"i*u(zeta_c) = {v:.6g} is not numerically real")
    return 1 if v.real > 0 else -1


def D_factor(j: int, n: int, sigma=None) -> complex:
    if n < 2:
        raise ValueError("phase degree n must be >= 2")
    if n % 2 == 0:
        return 1.0
    if sigma not in (1, -1):
        raise SignUndefined("odd phase degree needs sigma = +1 or -1")
    return cmath.exp(-1j * math.pi * (j + 1) * sigma / n)


@dataclass(frozen=True)
class ExpansionData:
    n: int
    u: complex
    sigma: int | None
    p: int
    q: int
    J: int
    c: dict  # k -> complex array indexed by j = 0..J (zero below k)

    def c_k(self, k: int, j: int) -> complex:
        return complex(self.c[k][j])


def _compose_var(s: Series1, var: str) -> Series1:
    return Series1(s.coeffs, var, s.ctx)


def stationary_coeffs(f: Series1, rep: CanonicalRep, n: int, J: int, sigma=None, tol: float = 1e-9) -> ExpansionData:
    """``c_k(j)`` for ``k = p..q`` and ``j <= J`` (capped by the series order)."""
    f = Series1([complex(c) for c in f.coeffs], "theta")
    scale = max(abs(c) for c in f.coeffs[: n + 3])
    if any(abs(f.coeffs[j]) > tol * scale for j in range(n)) or abs(f.coeffs[n]) <= tol * scale:
        raise DegreeMismatch(f"phase does not vanish to exact degree {n}")
    u = complex(f.coeffs[n])
    unit = f.lower(n) * (1 / u)
    root = unit.root(n)
    u_root = cmath.exp(cmath.log(u) / n)
    arr = np.zeros(root.order + 2, dtype=complex)
    arr[1:] = root.coeffs * u_root
    beta = Series1(arr, "theta")
    if abs(beta.coeffs[1]) <= 1e-14:
        raise BranchFailure("beta has a vanishing linear coefficient")
    theta_of_beta = _compose_var(beta.revert(), "beta")
    alpha_b = rep.alpha.compose(theta_of_beta)
    d_alpha = alpha_b.derivative()
    J = min(J, d_alpha.order)
    c = {}
    power = Series1.constant(1, d_alpha.order, "beta")
    for k in range(0, rep.q + 1):
        if k >= rep.p:
            prod = power * d_alpha
            vec = np.zeros(J + 1, dtype=complex)
            vec[k:] = prod.coeffs[k : J + 1]
            c[k] = vec
            expect = u ** (-(k + 1) / n) if k <= J else None
            if expect is not None and abs(vec[k] * u ** ((k + 1) / n) - 1) > 1e-9:
                raise BranchFailure(f"c_{k}({k}) = {vec[k]:.6g} does not match u^(-(k+1)/n)")
        power = power * alpha_b.truncate(d_alpha.order)
    return ExpansionData(n, u, sigma, rep.p, rep.q, J, c)


def B_terms(data: ExpansionData, k: int, s: float):
    """Nonzero terms ``(j, value)`` of the partial sum ``B_k(s)``."""
    n = data.n
    terms = []
    for j in range(k, data.J + 1):
        factor = 1 + (-1) ** j * D_factor(j, n, data.sigma)
        if factor == 0:
            continue
        g = gamma_real((j + 1) / n) / n
        terms.append((j, data.c_k(k, j) * factor * g * s ** (-(j + 1) / n)))
    return terms


def B_value(data: ExpansionData, k: int, s: float) -> complex:
    return sum((t for _, t in B_terms(data, k, s)), 0j)


@dataclass(frozen=True)
class EstimateReport:
    r: int
    s: int
    lam: float
    zeta: complex
    omega: complex
    p: int
    q: int
    n: int
    log_prefactor: complex
    bracket: complex
    terms_used: int
    term_scale: float = math.nan

    @property
    def cancels(self) -> bool:
        """True when the summed bracket is below 5% of its largest single term."""
        return not math.isnan(self.term_scale) and abs(self.bracket) <= 0.05 * self.term_scale

    @property
    def estimate_logmod(self) -> float:
        if self.bracket == 0:
            return -math.inf
        return self.log_prefactor.real + math.log(abs(self.bracket))

    @property
    def estimate_phase(self) -> float:
        if self.bracket == 0:
            return 0.0
        return math.remainder(self.log_prefactor.imag + cmath.phase(self.bracket), 2 * math.pi)

    @property
    def value(self) -> complex | None:
        """Plain value, or ``None`` when the modulus is not representable."""
        lm = self.estimate_logmod
        if lm == -math.inf:
            return 0j
        if abs(lm) >= LOG_VALUE_LIMIT:
            return None
        return cmath.exp(self.log_prefactor) * self.bracket

    @property
    def floor_logmod(self) -> float:
        """``log(|zeta^-r omega^-s| s^{-(q+1)/n})``, the error-floor scale."""
        return self.log_prefactor.real - (self.q + 1) / self.n * math.log(self.s)


@dataclass(frozen=True)
class DirectionState:
    point: DirectionPoint
    local: LocalSeries
    rep: CanonicalRep
    data: ExpansionData


def log_prefactor(zeta, omega, r, s) -> complex:
    return -r * cmath.log(complex(zeta)) - s * cmath.log(complex(omega))


class Analysis:
    """End-to-end pipeline for one problem and one critical point.

    Construction performs the sequential warm-up (chart, degrees and the
    representation at the critical point). Per-direction states are cached
    behind a lock so estimates over a grid may run concurrently.
    """

    def __init__(self, problem: Problem, zeta_c, omega_c=None, config: Config | None = None):
        self.problem = problem
        self.config = config or Config()
        cfg = self.config
        ctx = cfg.ctx
        self.chart: CriticalChart = critical_chart(problem, zeta_c, omega_c, cfg.chart_order, ctx)
        self.derived: DerivedPair = degrees(problem, self.chart, (cfg.delta_order, cfg.theta_order), cfg.tol)
        d = self.derived
        available = cfg.theta_order - d.n
        if cfg.J > available:
            raise OrderTooSmall(
                f"J = {cfg.J} needs theta_order >= {cfg.J + d.n} (have {cfg.theta_order})"
            )
        self.sigma = phase_sign(d.u_c, d.n)
        center = local_series(problem, self.chart, self.chart.zeta_c, cfg.theta_order)
        self.center_local = center
        self.center_rep = canonical_at_center(center.a.integral(), d.q, d.p, cfg.tol, center.zeta)
        self._cache: dict[float, DirectionState] = {}
        self._lock = threading.Lock()

    @property
    def p(self):
        return self.derived.p

    @property
    def q(self):
        return self.derived.q

    @property
    def n(self):
        return self.derived.n

    def state(self, lam: float) -> DirectionState:
        lam = float(lam)
        with self._lock:
            hit = self._cache.get(lam)
        if hit is not None:
            return hit
        cfg = self.config
        point = solve_direction(self.chart, lam, cfg.cone)
        local = local_series(self.problem, self.chart, point.zeta, cfg.theta_order)
        I = local.a.integral()
        rep = canonical_rep(I, self.p, self.q, self.center_rep, zeta=point.zeta)
        data = stationary_coeffs(local.f, rep, self.n, cfg.J, self.sigma)
        st = DirectionState(point, local, rep, data)
        with self._lock:
            self._cache.setdefault(lam, st)
        return st

    def _report(self, r, s, st: DirectionState, bracket, terms, term_scale=None):
        pt = st.point
        return EstimateReport(
            r, s, pt.lam, complex(pt.zeta), complex(pt.omega), self.p, self.q, self.n,
            log_prefactor(pt.zeta, pt.omega, r, s), complex(bracket), terms,
            abs(bracket) if term_scale is None else term_scale,
        )

    def estimate(self, r: int, s: int, J: int | None = None) -> EstimateReport:
        if s <= 0 or r < 0:
            raise ValueError("need r >= 0 and s > 0")
        st = self.state(r / s)
        data = st.data
        if J is not None:
            data = ExpansionData(data.n, data.u, data.sigma, data.p, data.q, min(J, data.J), data.c)
        total = 0j
        biggest = 0.0
        for k in range(self.p, self.q + 1):
            term = st.rep.A_k(k) * B_value(data, k, s)
            total += term
            biggest = max(biggest, abs(term))
        return self._report(r, s, st, total / (2 * math.pi), data.J, biggest / (2 * math.pi))

    def sigma_expansion(self, r: int, s: int, J: int | None = None) -> complex:
        """The expansion of ``Sigma(zeta(r/s); s) = 2 pi * bracket``."""
        return 2 * math.pi * self.estimate(r, s, J).bracket

    def leading_order(self, r: int, s: int) -> EstimateReport:
        """One-term estimate, available when the amplitude has constant degree."""
        if self.p != self.q:
            raise NotConstantDegree(f"amplitude changes degree ({self.p} to {self.q}) at zeta_c")
        st = self.state(r / s)
        k = self.p
        data = st.data
        n = self.n
        term = data.c_k(k, k) * (1 + (-1) ** k * D_factor(k, n, data.sigma)) * gamma_real((k + 1) / n) / n
        bracket = st.rep.A_k(k) * term * s ** (-(k + 1) / n) / (2 * math.pi)
        return self._report(r, s, st, bracket, 1)

    def split_amplitude(self, r: int, s: int, J: int | None = None) -> EstimateReport:
        """Independent evaluation splitting ``a`` into a low-degree polynomial plus a constant-degree rest.

        ``a = a_0 + a_1`` with ``a_0`` the ``theta``-polynomial of degree
        ``< q`` and ``a_1`` vanishing to order ``q`` for every ``zeta``; each
        part is expanded with the constant-degree machinery.
        """
        if self.p == self.q:
            raise NotApplicable("split_amplitude needs a change of degree (p < q)")
        st = self.state(r / s)
        J = self.config.J if J is None else J
        a = Series1([complex(c) for c in st.local.a.coeffs], "theta")
        q, n = self.q, self.n
        total = 0j
        biggest = 0.0
        used = 0
        for k in range(q):
            ak = a.coeffs[k]
            mono = np.zeros(a.order + 2, dtype=complex)
            mono[k + 1] = 1.0 / (k + 1)
            rep_k = canonical_rep(Series1(mono, "theta"), k, k)
            data = stationary_coeffs(st.local.f, rep_k, n, J, self.sigma)
            term = ak * B_value(data, k, s)
            total += term
            biggest = max(biggest, abs(term))
            used = max(used, data.J)
        rest = a.coeffs.copy()
        rest[:q] = 0
        rep_rest = canonical_rep(Series1(rest, "theta").integral(), q, q)
        data = stationary_coeffs(st.local.f, rep_rest, n, J, self.sigma)
        term = rep_rest.A_k(q) * B_value(data, q, s)
        total += term
        biggest = max(biggest, abs(term))
        used = max(used, data.J)
        return self._report(r, s, st, total / (2 * math.pi), used, biggest / (2 * math.pi))


def estimate(analysis: Analysis, r: int, s: int, J: int | None = None) -> EstimateReport:
    return analysis.estimate(r, s, J)


def leading_order(analysis: Analysis, r: int, s: int) -> EstimateReport:
    return analysis.leading_order(r, s)


def split_amplitude(analysis: Analysis, r: int, s: int, J: int | None = None) -> EstimateReport:
    return analysis.split_amplitude(r, s, J)
