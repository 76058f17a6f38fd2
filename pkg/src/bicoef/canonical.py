"""Polynomial canonical representation of the amplitude integral.

For ``I(theta) = int_0^theta a`` vanishing to order ``p + 1`` we look for
coefficients ``A_p..A_q`` and a change of variable ``alpha = theta + ...``
with

    I(theta) = P(alpha(theta)),   P(x) = sum_k A_k x^(k+1) / (k+1).

``A_p = (p+1) [theta^(p+1)] I`` always. For ``q = p + 1`` the top
coefficient has a closed form through the nontrivial zero of the reduced
amplitude; for ``q - p >= 2`` the zeros coalesce (the amplitude is a
function of ``z = zeta e^{i theta}`` alone) and a closed form follows from
``P'(x) = A_q x^p (x - x*)^(q-p)``. Given ``A``, ``alpha`` is fitted by
Gauss-Newton on the defect coefficients. A square Newton solve for ``A`` and
``alpha`` together serves as an independent cross-check.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .errors import (
    BranchAmbiguous,
    ContinuationLost,
    DegreeMismatch,
    NoNearbyRoot,
    ResidualTooLarge,
)
from .series import STANDARD, Series1

RESIDUAL_TOL = 1e-8
SMALL_LEADING = 1e-6


@dataclass(frozen=True)
class CanonicalRep:
    zeta: complex
    p: int
    q: int
    A: tuple
    alpha: Series1
    residual: float
    method: str = field(default="", compare=False)

    def A_k(self, k: int) -> complex:
        return self.A[k - self.p]


def amplitude_integral(a: Series1) -> Series1:
    return a.integral()


def _poly_of_alpha(A, p, alpha: Series1) -> Series1:
    """``P(alpha) = sum_k A_k alpha^(k+1)/(k+1)``."""
    power = alpha ** (p + 1)
    out = power * (A[0] / (p + 1))
    for idx in range(1, len(A)):
        k = p + idx
        power = power * alpha
        out = out + power * (A[idx] / (k + 1))
    return out


def defect_residual(I: Series1, A, p, alpha: Series1) -> float:
    """Largest defect coefficient ``|[theta^j](I - P(alpha))|`` scaled by ``max |[theta^j] I|``."""
    D = I - _poly_of_alpha(A, p, alpha)
    scale = max(abs(complex(c)) for c in I.coeffs) or 1.0
    return max(abs(complex(c)) for c in D.coeffs) / scale


def _as_complex(s: Series1) -> Series1:
    if s.ctx is STANDARD or s.ctx.precision == "standard":
        return s
    return Series1([complex(c) for c in s.coeffs], s.var, STANDARD)


def canonical_at_center(I_c: Series1, q: int, p: int = 0, tol: float = 1e-9, zeta=None) -> CanonicalRep:
    """Representation at the critical point, where ``A_k = 0`` for ``k < q``."""
    I_c = _as_complex(I_c)
    scale = max(abs(c) for c in I_c.coeffs[: q + 3])
    if q + 1 > I_c.order:
        raise DegreeMismatch(f"integral order {I_c.order} too small for q = {q}")
    if any(abs(I_c.coeffs[j]) > tol * scale for j in range(q + 1)) or abs(I_c.coeffs[q + 1]) <= tol * scale:
        raise DegreeMismatch(f"integral does not vanish to exact degree {q + 1}")
    Aq = (q + 1) * I_c.coeffs[q + 1]
    unit = I_c.lower(q + 1) * ((q + 1) / Aq)
    alpha = _shift(unit if q == 0 else unit.root(q + 1), I_c.order)
    A = tuple([0j] * (q - p) + [complex(Aq)])
    resid = defect_residual(I_c, A, p, alpha)
    return CanonicalRep(zeta, p, q, A, alpha, resid, "center")


def _shift(unit_root: Series1, order: int) -> Series1:
    """``theta * unit_root`` padded/truncated to ``order``."""
    arr = np.zeros(order + 1, dtype=complex)
    n = min(order, unit_root.order + 1)
    arr[1 : n + 1] = unit_root.coeffs[:n]
    return Series1(arr, unit_root.var)


def _alpha_constant_degree(I: Series1, p: int):
    Ap = (p + 1) * I.coeffs[p + 1]
    unit = I.lower(p + 1) * ((p + 1) / Ap)
    root = unit if p == 0 else unit.root(p + 1)
    return Ap, _shift(root, I.order)


def _alpha_vector(alpha: Series1, M: int) -> np.ndarray:
    x = np.zeros(M - 1, dtype=complex)
    n = min(M, alpha.order)
    x[: max(0, n - 1)] = alpha.coeffs[2 : n + 1]
    return x


def _alpha_from_vector(x, order, var="theta") -> Series1:
    arr = np.zeros(order + 1, dtype=complex)
    arr[1] = 1.0
    arr[2 : 2 + len(x)] = x[: order - 1]
    return Series1(arr, var)


def _defect_system(I: Series1, A, p, q, x, M, need_A: bool):
    """Defect vector and Jacobian for equations ``theta^(p+2)..theta^(q+M)``."""
    N = q + M
    alpha = _alpha_from_vector(x, N, I.var)
    It = I.truncate(N)
    P = _poly_of_alpha(A, p, alpha)
    D = It - P
    rows = slice(p + 2, N + 1)
    # dP/dalpha = sum_k A_k alpha^k
    dP = alpha ** p * A[0]
    power = alpha ** p
    for idx in range(1, len(A)):
        power = power * alpha
        dP = dP + power * A[idx]
    cols = []
    if need_A:
        power = alpha ** (p + 1)
        for idx in range(1, len(A)):
            k = p + idx
            power = power * alpha
            cols.append(-(power.coeffs / (k + 1))[rows])
    theta_m = np.zeros(N + 1, dtype=complex)
    for m in range(2, M + 1):
        theta_m[:] = 0
        theta_m[m] = 1.0
        cols.append(-np.convolve(dP.coeffs, theta_m)[: N + 1][rows])
    Jac = np.column_stack(cols)
    return D.coeffs[rows].astype(complex), Jac


def fit_alpha(I: Series1, A, p: int, q: int, alpha0: Series1 | None = None, M: int | None = None, iters: int = 30):
    """Gauss-Newton fit of ``alpha`` for fixed ``A`` (least squares on the defect)."""
    I = _as_complex(I)
    M = I.order - q if M is None else M
    x = _alpha_vector(alpha0, M) if alpha0 is not None else np.zeros(M - 1, dtype=complex)
    for _ in range(iters):
        D, Jac = _defect_system(I, A, p, q, x, M, need_A=False)
        step, *_ = np.linalg.lstsq(Jac, D, rcond=None)
        x = x - step
        if np.max(np.abs(step)) <= 1e-15 * max(1.0, np.max(np.abs(x), initial=0.0)):
            break
    return _alpha_from_vector(x, I.order, I.var)


def newton_rep(I: Series1, p: int, q: int, A_init, alpha_init: Series1 | None = None, M: int | None = None, iters: int = 40):
    """Square Newton solve for ``A_(p+1)..A_q`` and ``alpha_2..alpha_M`` jointly.

    ``alpha`` is truncated to degree ``M`` and the defect is matched through
    ``theta^(q+M)``; ``A_p`` is fixed at ``(p+1)[theta^(p+1)] I``.
    """
    I = _as_complex(I)
    M = I.order - q if M is None else M
    Ap = (p + 1) * I.coeffs[p + 1]
    a_part = np.array([complex(v) for v in A_init[1:]], dtype=complex)
    x = _alpha_vector(alpha_init, M) if alpha_init is not None else np.zeros(M - 1, dtype=complex)
    nA = q - p
    for _ in range(iters):
        A = (Ap, *a_part)
        D, Jac = _defect_system(I, A, p, q, x, M, need_A=True)
        step = np.linalg.solve(Jac, D)
        a_part = a_part - step[:nA]
        x = x - step[nA:]
        if np.max(np.abs(step)) <= 1e-15 * max(1.0, np.max(np.abs(a_part)), np.max(np.abs(x), initial=0.0)):
            break
    alpha = _alpha_from_vector(x, I.order, I.var)
    return (Ap, *a_part), alpha


def _reduced_root(a: Series1, p: int, multiplicity: int = 1):
    """Small zero of ``a / theta^p`` of the given multiplicity, by Newton from the linear guess."""
    b = a.lower(p)
    scale = max(abs(c) for c in b.coeffs)
    m = multiplicity
    if b.order < m or abs(b.coeffs[m]) <= 1e-12 * scale:
        raise NoNearbyRoot("reduced amplitude has no small zero of the expected multiplicity")
    # an m-fold zero of b is a simple zero of its (m-1)-th derivative
    c = b
    for _ in range(m - 1):
        c = c.derivative()
    theta = -c.coeffs[0] / c.coeffs[1]
    dc = c.derivative()
    for _ in range(100):
        val, dval = c(theta), dc(theta)
        if dval == 0:
            break
        step = val / dval
        theta = theta - step
        if abs(step) <= 1e-15 * max(1.0, abs(theta)):
            break
    radius_hint = 1.0
    if not np.isfinite(theta) or abs(theta) > radius_hint:
        raise NoNearbyRoot(f"Newton for the reduced amplitude root left the neighborhood (theta = {theta})")
    return complex(theta)


def adjacent_closed_form(a: Series1, p: int, ref_A):
    """``A_p``, ``A_(p+1)`` and the nontrivial root for a one-step change of degree.

    ``A_(p+1)^(p+1) = (-1)^(p+1) A_p^(p+2) / ((p+1)(p+2) I(theta*))`` where
    ``theta*`` is the nontrivial zero of ``a`` near 0; the root nearest
    ``ref_A`` is returned.
    """
    a = _as_complex(a)
    theta_root = _reduced_root(a, p)
    I = a.integral()
    I_root = I(theta_root)
    Ap = complex(a.coeffs[p])
    if abs(I_root) == 0:
        raise NoNearbyRoot("integral vanishes at the root")
    value = (-1) ** (p + 1) * Ap ** (p + 2) / ((p + 1) * (p + 2) * I_root)
    if p == 0:
        return Ap, complex(value), theta_root
    r0 = cmath.exp(cmath.log(value) / (p + 1))
    cands = [r0 * cmath.exp(2j * cmath.pi * k / (p + 1)) for k in range(p + 1)]
    ref = complex(ref_A)
    dist = sorted((abs(c - ref), c) for c in cands)
    if dist[1][0] - dist[0][0] <= 1e-6 * max(abs(ref), 1e-300):
        raise BranchAmbiguous("two roots are equally close to the reference A_(p+1)")
    return Ap, dist[0][1], theta_root


def coalesced_coefficients(a: Series1, p: int, q: int, ref_A=None):
    """Closed form for ``q - p = m >= 1`` with an m-fold nontrivial root.

    ``P'(x) = A_q x^p (x - x*)^m`` with ``x*^(p+1) = I* (q+1)! / (A_p p! m!)``,
    ``A_q = A_p / (-x*)^m`` and ``A_k = A_q C(m, k-p) (-x*)^(q-k)``.
    """
    a = _as_complex(a)
    m = q - p
    theta_root = _reduced_root(a, p, multiplicity=m)
    I_star = a.integral()(theta_root)
    Ap = complex(a.coeffs[p])
    base = I_star * factorial(q + 1) / (Ap * factorial(p) * factorial(m))
    r0 = cmath.exp(cmath.log(base) / (p + 1))
    cands = [r0 * cmath.exp(2j * cmath.pi * k / (p + 1)) for k in range(p + 1)]
    options = []
    for xs in cands:
        Aq = Ap / (-xs) ** m
        options.append(tuple(Aq * comb(m, k - p) * (-xs) ** (q - k) for k in range(p, q + 1)))
    if ref_A is not None and len(options) > 1:
        options.sort(key=lambda A: abs(A[-1] - complex(ref_A)))
    return options[0], theta_root


def canonical_rep(I: Series1, p: int, q: int, init: CanonicalRep | None = None, order: int | None = None, zeta=None) -> CanonicalRep:
    """Canonical representation of ``I`` with degrees ``p <= q``.

    ``init`` (typically the representation at the critical point or at a
    neighboring ``zeta``) anchors branch choices and seeds the iterations.
    """
    I = _as_complex(I)
    if order is not None and order < I.order:
        I = I.truncate(order)
    scale = max(abs(c) for c in I.coeffs[: q + 3])
    if any(abs(I.coeffs[j]) > 1e-9 * scale for j in range(p + 1)):
        raise DegreeMismatch(f"integral does not vanish to degree {p + 1}")
    if q == p:
        Ap, alpha = _alpha_constant_degree(I, p)
        A = (complex(Ap),)
        method = "closed"
    else:
        Ap = complex((p + 1) * I.coeffs[p + 1])
        a = I.derivative()
        ref = init.A[-1] if init is not None else None
        alpha0 = init.alpha if init is not None else None
        if abs(Ap) < SMALL_LEADING * scale:
            seed = init.A if init is not None else tuple([Ap] + [0j] * (q - p - 1) + [complex((q + 1) * I.coeffs[q + 1])])
            A, alpha = newton_rep(I, p, q, seed, alpha0)
            method = "newton"
        else:
            if q == p + 1:
                ref = ref if ref is not None else 1.0
                _, top, _ = adjacent_closed_form(a, p, ref)
                A = (Ap, top)
                method = "adjacent"
            else:
                A, _ = coalesced_coefficients(a, p, q, ref)
                A = (Ap, *A[1:])
                method = "coalesced"
            alpha = fit_alpha(I, A, p, q, alpha0)
        if init is not None and init.A[-1] != 0:
            if abs(A[-1] - init.A[-1]) > abs(init.A[-1]):
                raise ContinuationLost(
                    f"A_q = {A[-1]:.6g} moved more than |A_q| away from the continuation seed {init.A[-1]:.6g}"
                )
    resid = defect_residual(I, A, p, alpha)
    if resid > RESIDUAL_TOL:
        raise ResidualTooLarge(f"canonical defect residual {resid:.3g} exceeds {RESIDUAL_TOL:g}")
    return CanonicalRep(zeta, p, q, tuple(complex(v) for v in A), alpha, resid, method)
