"""Truncated power series in one and two variables.

Coefficients live in a read-only numpy array whose dtype depends on the
precision mode of the :class:`Context` the series was built with:

* ``standard`` - ``complex128``
* ``extended`` - ``object`` array of mpmath ``mpc`` at 32 significant digits
* ``exact``    - ``object`` array of :class:`fractions.Fraction` (rational,
  real); transcendental operations are unavailable

Binary operations truncate to the smaller order of the two operands.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

import mpmath
import numpy as np

from .errors import (
    AmbiguousBranch,
    DivisionByNonUnit,
    IndexOutOfOrder,
    LogOfZero,
    NonZeroConstant,
    NotInvertible,
    PrecisionError,
    RootOfZero,
)

__all__ = [
    "Context",
    "STANDARD",
    "EXTENDED",
    "EXACT",
    "Branch",
    "Series1",
    "Series2",
    "arith",
    "compose",
    "revert",
    "transcend",
    "nth_root",
    "calculus",
    "extract",
]

# Fixed-precision mpmath context used by extended mode; never mutated after import.
_MP = mpmath.MPContext()
_MP.dps = 32

_PRECISIONS = ("standard", "extended", "exact")


@dataclass(frozen=True)
class Context:
    """Arithmetic mode shared by every object in one computation.

    ``tol`` is the relative threshold below which a leading coefficient is
    treated as zero (relative to the largest coefficient magnitude).
    """

    precision: str = "standard"
    tol: float = 1e-12

    def __post_init__(self):
        if self.precision not in _PRECISIONS:
            raise ValueError(f"unknown precision {self.precision!r}")

    @property
    def dtype(self):
        return np.complex128 if self.precision == "standard" else object

    @property
    def extended(self):
        return self.precision == "extended"

    @property
    def exact(self):
        return self.precision == "exact"

    def scalar(self, x):
        if self.precision == "standard":
            if isinstance(x, (mpmath.mpc, mpmath.mpf)):
                return complex(x)
            return complex(x)
        if self.precision == "extended":
            if isinstance(x, Fraction):
                return _MP.mpc(_MP.mpf(x.numerator) / x.denominator)
            if isinstance(x, (mpmath.mpc, mpmath.mpf)):
                return _MP.mpc(x)
            return _MP.mpc(complex(x)) if isinstance(x, complex) else _MP.mpc(x)
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, complex):
            if x.imag != 0:
                raise PrecisionError("exact mode is restricted to rational numbers")
            x = x.real
        return Fraction(x)

    def array(self, values):
        if self.precision == "standard":
            return np.array([complex(v) for v in np.ravel(values)], dtype=complex).reshape(
                np.shape(values)
            )
        flat = [self.scalar(v) for v in np.ravel(np.asarray(values, dtype=object))]
        out = np.empty(len(flat), dtype=object)
        out[:] = flat
        return out.reshape(np.shape(values))

    def zeros(self, shape):
        if self.precision == "standard":
            return np.zeros(shape, dtype=complex)
        out = np.empty(shape, dtype=object)
        out.fill(self.scalar(0))
        return out

    def abs(self, x) -> float:
        return float(abs(x))

    @property
    def pi(self):
        return _MP.pi if self.extended else math.pi

    @property
    def imag_unit(self):
        return self.scalar(1j)

    def _no_exact(self, name):
        if self.exact:
            raise PrecisionError(f"{name} is not available in exact mode")

    def exp(self, x):
        self._no_exact("exp")
        return _MP.exp(x) if self.extended else cmath.exp(x)

    def log(self, x):
        self._no_exact("log")
        if self.abs(x) == 0:
            raise LogOfZero("log of zero")
        return _MP.log(x) if self.extended else cmath.log(x)

    def sqrt(self, x):
        self._no_exact("sqrt")
        return _MP.sqrt(x) if self.extended else cmath.sqrt(x)

    def principal_root(self, x, n: int):
        self._no_exact("root")
        if self.abs(x) == 0:
            raise RootOfZero("root of zero")
        if n == 1:
            return self.scalar(x)
        return self.exp(self.log(x) / n)

    def all_roots(self, x, n: int):
        r0 = self.principal_root(x, n)
        return [r0 * self.exp(2j * self.pi * k / n) if k else r0 for k in range(n)]

    def to_complex(self, x) -> complex:
        return complex(x)


STANDARD = Context("standard")
EXTENDED = Context("extended")
EXACT = Context("exact")


@dataclass(frozen=True)
class Branch:
    """Which n-th root to take of a series constant term."""

    mode: str = "principal"
    target: complex | None = None

    def __post_init__(self):
        if self.mode not in ("principal", "nearest"):
            raise ValueError(f"unknown branch mode {self.mode!r}")
        if self.mode == "nearest" and (self.target is None or abs(complex(self.target)) == 0):
            raise ValueError("nearest branch requires a nonzero target")

    @classmethod
    def principal(cls):
        return cls("principal")

    @classmethod
    def nearest(cls, target):
        return cls("nearest", target)

    def select(self, value, n: int, ctx: Context):
        if self.mode == "principal":
            return ctx.principal_root(value, n)
        roots = ctx.all_roots(value, n)
        t = complex(self.target)
        dist = sorted((abs(complex(r) - t), k) for k, r in enumerate(roots))
        if len(dist) > 1 and dist[1][0] - dist[0][0] <= 1e-12 * max(abs(t), abs(complex(roots[0]))):
            raise AmbiguousBranch(f"target {t} is equidistant from two {n}-th roots")
        return roots[dist[0][1]]


def _is_scalar(x):
    return isinstance(x, (Number, mpmath.mpc, mpmath.mpf)) and not isinstance(x, bool)


def _finite(arr, ctx):
    if ctx.precision == "standard" and not np.all(np.isfinite(arr)):
        raise PrecisionError("non-finite coefficient produced")
    return arr


def _readonly(arr):
    arr.flags.writeable = False
    return arr


class Series1:
    """Truncated Taylor series ``c_0 + c_1 t + ... + c_N t^N``."""

    __slots__ = ("coeffs", "var", "ctx")

    def __init__(self, coeffs, var: str = "t", ctx: Context = STANDARD):
        arr = coeffs if isinstance(coeffs, np.ndarray) and coeffs.dtype == ctx.dtype else ctx.array(coeffs)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("Series1 needs a nonempty 1-d coefficient sequence")
        if arr is coeffs:
            arr = arr.copy()
        object.__setattr__(self, "coeffs", _readonly(_finite(arr, ctx)))
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "ctx", ctx)

    def __setattr__(self, name, value):
        raise AttributeError("Series1 is immutable")

    # construction
    @classmethod
    def constant(cls, c, order: int, var="t", ctx: Context = STANDARD):
        arr = ctx.zeros(order + 1)
        arr[0] = ctx.scalar(c)
        return cls(arr, var, ctx)

    @classmethod
    def variable(cls, order: int, center=0, var="t", ctx: Context = STANDARD):
        """The series of ``center + t``."""
        arr = ctx.zeros(order + 1)
        arr[0] = ctx.scalar(center)
        if order >= 1:
            arr[1] = ctx.scalar(1)
        return cls(arr, var, ctx)

    def _new(self, arr):
        return Series1(arr, self.var, self.ctx)

    # basic queries
    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def scale(self) -> float:
        return max(self.ctx.abs(c) for c in self.coeffs)

    def coeff(self, k: int):
        if not 0 <= k <= self.order:
            raise IndexOutOfOrder(f"coefficient {k} outside order {self.order}")
        return self.coeffs[k]

    def __getitem__(self, k):
        return self.coeff(k)

    def __call__(self, x):
        acc = self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * x + c
        return acc

    def truncate(self, order: int) -> Series1:
        if order > self.order:
            raise IndexOutOfOrder(f"cannot raise order {self.order} to {order}")
        return self._new(self.coeffs[: order + 1].copy())

    def valuation(self, tol=None) -> int | None:
        """Index of the first coefficient above ``tol`` times the scale."""
        tol = self.ctx.tol if tol is None else tol
        sc = self.scale()
        for k, c in enumerate(self.coeffs):
            if self.ctx.abs(c) > tol * sc:
                return k
        return None

    def lower(self, k: int) -> Series1:
        """Divide by ``t**k`` discarding the first ``k`` coefficients."""
        if k > self.order:
            raise IndexOutOfOrder(f"cannot divide order-{self.order} series by t^{k}")
        return self._new(self.coeffs[k:].copy())

    def raise_by(self, k: int) -> Series1:
        """Multiply by ``t**k`` keeping the order."""
        arr = self.ctx.zeros(self.order + 1)
        if k <= self.order:
            arr[k:] = self.coeffs[: self.order + 1 - k]
        return self._new(arr)

    def allclose(self, other, tol=1e-12) -> bool:
        other = self._coerce(other)
        n = min(self.order, other.order)
        diff = max(self.ctx.abs(a - b) for a, b in zip(self.coeffs[: n + 1], other.coeffs[: n + 1]))
        return diff <= tol * max(1.0, self.scale(), other.scale())

    def __repr__(self):
        body = ", ".join(f"{complex(c):.6g}" if not self.ctx.exact else str(c) for c in self.coeffs[:6])
        tail = ", ..." if self.order >= 6 else ""
        return f"Series1({self.var}; order={self.order}; [{body}{tail}])"

    # arithmetic
    def _coerce(self, other) -> Series1:
        if isinstance(other, Series1):
            if other.var != self.var:
                raise ValueError(f"mixing series in {self.var!r} and {other.var!r}")
            return other
        if _is_scalar(other):
            return Series1.constant(other, self.order, self.var, self.ctx)
        return NotImplemented

    def _pair(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return None, None
        n = min(self.order, other.order)
        return self.coeffs[: n + 1], other.coeffs[: n + 1]

    def __add__(self, other):
        if _is_scalar(other):
            arr = self.coeffs.copy()
            arr[0] = arr[0] + self.ctx.scalar(other)
            return self._new(arr)
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return self._new(a + b)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.coeffs)

    def __sub__(self, other):
        if _is_scalar(other):
            return self + (-self.ctx.scalar(other))
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return self._new(a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other):
            return self._new(self.coeffs * self.ctx.scalar(other))
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return self._new(np.convolve(a, b)[: a.size])

    __rmul__ = __mul__

    def _check_unit(self, what="division"):
        c0 = self.coeffs[0]
        if self.ctx.abs(c0) <= self.ctx.tol * self.scale() or self.ctx.abs(c0) == 0:
            raise DivisionByNonUnit(f"{what}: constant term {complex(c0):.3g} is ~0")
        return c0

    def reciprocal(self) -> Series1:
        b = self.coeffs
        b0 = self._check_unit()
        n = b.size
        c = self.ctx.zeros(n)
        c[0] = self.ctx.scalar(1) / b0
        for k in range(1, n):
            c[k] = -np.dot(b[1 : k + 1], c[k - 1 :: -1]) / b0
        return self._new(c)

    def __truediv__(self, other):
        if _is_scalar(other):
            if self.ctx.abs(other) == 0:
                raise DivisionByNonUnit("division by zero scalar")
            return self._new(self.coeffs / self.ctx.scalar(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = min(self.order, other.order)
        a = self.coeffs[: n + 1]
        b = other.coeffs[: n + 1]
        b0 = other.truncate(n)._check_unit()
        c = self.ctx.zeros(n + 1)
        for k in range(n + 1):
            acc = a[k]
            if k:
                acc = acc - np.dot(b[1 : k + 1], c[k - 1 :: -1])
            c[k] = acc / b0
        return self._new(c)

    def __rtruediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("series powers must be integers; use root() or exp(c*log())")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Series1.constant(1, self.order, self.var, self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # calculus
    def derivative(self) -> Series1:
        if self.order == 0:
            return Series1.constant(0, 0, self.var, self.ctx)
        k = np.arange(1, self.order + 1)
        if self.ctx.dtype is object:
            k = np.array([self.ctx.scalar(int(v)) for v in k], dtype=object)
        return self._new(self.coeffs[1:] * k)

    def integral(self) -> Series1:
        arr = self.ctx.zeros(self.order + 2)
        for k, c in enumerate(self.coeffs):
            arr[k + 1] = c / self.ctx.scalar(k + 1)
        return self._new(arr[: self.order + 2])

    # functional
    def compose(self, inner: Series1) -> Series1:
        """``self(inner(t))``; ``inner`` must have zero constant term."""
        if not isinstance(inner, Series1):
            raise TypeError("compose expects a Series1 inner argument")
        c0 = inner.coeffs[0]
        if self.ctx.abs(c0) > self.ctx.tol * max(1.0, inner.scale()):
            raise NonZeroConstant(f"inner series has constant term {complex(c0):.3g}")
        n = min(self.order, inner.order)
        arr = inner.coeffs[: n + 1].copy()
        arr[0] = self.ctx.scalar(0)
        x = Series1(arr, inner.var, inner.ctx)
        acc = Series1.constant(self.coeffs[n], n, inner.var, inner.ctx)
        for k in range(n - 1, -1, -1):
            acc = acc * x + self.coeffs[k]
        return acc

    def revert(self) -> Series1:
        """Compositional inverse: ``T`` with ``T(self(t)) = t``."""
        s0 = self.coeffs[0]
        sc = self.scale()
        if self.ctx.abs(s0) > self.ctx.tol * sc:
            raise NonZeroConstant("revert requires a zero constant term")
        if self.order < 1 or self.ctx.abs(self.coeffs[1]) <= self.ctx.tol * sc:
            raise NotInvertible("linear coefficient is ~0")
        s = self.coeffs.copy()
        s[0] = self.ctx.scalar(0)
        S = self._new(s)
        # The residual vanishes to order 2, so [t^N] of the Newton step only
        # reads S' up to t^{N-2}; padding S' keeps the full order N.
        d = S.derivative().coeffs
        dS = self._new(np.concatenate([d, self.ctx.zeros(1)]))
        ident = Series1.variable(self.order, 0, self.var, self.ctx)
        T = ident * (self.ctx.scalar(1) / s[1])
        for _ in range(2 * max(1, self.order.bit_length()) + 4):
            resid = S.compose(T) - ident
            step = resid / dS.compose(T)
            T = T - step
            if step.scale() <= 1e-3 * self.ctx.tol * max(1.0, T.scale()):
                break
        return T

    def exp(self) -> Series1:
        s = self.coeffs
        n = s.size
        e = self.ctx.zeros(n)
        e[0] = self.ctx.exp(s[0])
        for k in range(1, n):
            j = np.arange(1, k + 1)
            e[k] = np.dot(j * s[1 : k + 1], e[k - 1 :: -1]) / k
        return self._new(e)

    def log(self) -> Series1:
        s0 = self.coeffs[0]
        if self.ctx.abs(s0) <= self.ctx.tol * self.scale() or self.ctx.abs(s0) == 0:
            raise LogOfZero("log of a series with ~0 constant term")
        quotient = self.derivative() / self.truncate(max(self.order - 1, 0))
        out = quotient.integral()
        arr = out.coeffs.copy()
        arr[0] = self.ctx.log(s0)
        return self._new(arr)

    def root(self, n: int, branch: Branch | None = None) -> Series1:
        """n-th root with constant term chosen by ``branch``."""
        if n < 1:
            raise ValueError("root order must be positive")
        branch = Branch.principal() if branch is None else branch
        s = self.coeffs
        s0 = s[0]
        if self.ctx.abs(s0) <= self.ctx.tol * self.scale() or self.ctx.abs(s0) == 0:
            raise RootOfZero("root of a series with ~0 constant term")
        size = s.size
        t = self.ctx.zeros(size)
        t[0] = branch.select(s0, n, self.ctx)
        alpha = self.ctx.scalar(1) / n
        for k in range(1, size):
            acc = self.ctx.scalar(0)
            for j in range(1, k + 1):
                acc = acc + (alpha * j - (k - j)) * s[j] * t[k - j]
            t[k] = acc / (k * s0)
        return self._new(t)

    def sqrt(self, branch: Branch | None = None) -> Series1:
        return self.root(2, branch)


class Series2:
    """Truncated series in two variables, ``sum c[i, j] x^i y^j``.

    Orders are independent per variable (rectangular truncation).
    """

    __slots__ = ("coeffs", "vars", "ctx")

    def __init__(self, coeffs, vars=("x", "y"), ctx: Context = STANDARD):
        arr = coeffs if isinstance(coeffs, np.ndarray) and coeffs.dtype == ctx.dtype else ctx.array(coeffs)
        if arr.ndim != 2 or 0 in arr.shape:
            raise ValueError("Series2 needs a nonempty 2-d coefficient grid")
        if arr is coeffs:
            arr = arr.copy()
        object.__setattr__(self, "coeffs", _readonly(_finite(arr, ctx)))
        object.__setattr__(self, "vars", tuple(vars))
        object.__setattr__(self, "ctx", ctx)

    def __setattr__(self, name, value):
        raise AttributeError("Series2 is immutable")

    @classmethod
    def constant(cls, c, orders, vars=("x", "y"), ctx: Context = STANDARD):
        arr = ctx.zeros((orders[0] + 1, orders[1] + 1))
        arr[0, 0] = ctx.scalar(c)
        return cls(arr, vars, ctx)

    @classmethod
    def variable(cls, which: int, orders, center=0, vars=("x", "y"), ctx: Context = STANDARD):
        """``center + x`` (which=0) or ``center + y`` (which=1)."""
        arr = ctx.zeros((orders[0] + 1, orders[1] + 1))
        arr[0, 0] = ctx.scalar(center)
        idx = (1, 0) if which == 0 else (0, 1)
        if idx[0] <= orders[0] and idx[1] <= orders[1]:
            arr[idx] = ctx.scalar(1)
        return cls(arr, vars, ctx)

    @classmethod
    def from_series1(cls, s: Series1, which: int, other_order: int, vars=("x", "y")):
        """Embed a one-variable series as a function of ``vars[which]`` only."""
        if which == 0:
            arr = s.ctx.zeros((s.order + 1, other_order + 1))
            arr[:, 0] = s.coeffs
        else:
            arr = s.ctx.zeros((other_order + 1, s.order + 1))
            arr[0, :] = s.coeffs
        return cls(arr, vars, s.ctx)

    def _new(self, arr):
        return Series2(arr, self.vars, self.ctx)

    @property
    def orders(self):
        return (self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1)

    def scale(self) -> float:
        return max(self.ctx.abs(c) for c in self.coeffs.ravel())

    def coeff(self, i: int, j: int):
        n1, n2 = self.orders
        if not (0 <= i <= n1 and 0 <= j <= n2):
            raise IndexOutOfOrder(f"coefficient ({i}, {j}) outside orders {self.orders}")
        return self.coeffs[i, j]

    def __getitem__(self, ij):
        return self.coeff(*ij)

    def row(self, i: int) -> Series1:
        """Coefficient of ``x^i`` as a series in ``y``."""
        return Series1(self.coeffs[i, :].copy(), self.vars[1], self.ctx)

    def col(self, j: int) -> Series1:
        """Coefficient of ``y^j`` as a series in ``x``."""
        return Series1(self.coeffs[:, j].copy(), self.vars[0], self.ctx)

    def at_first(self, x) -> Series1:
        """Substitute a value for the first variable."""
        acc = self.coeffs[-1, :]
        for i in range(self.coeffs.shape[0] - 2, -1, -1):
            acc = acc * x + self.coeffs[i, :]
        return Series1(np.array(acc, dtype=self.ctx.dtype), self.vars[1], self.ctx)

    def __call__(self, x, y):
        return self.at_first(x)(y)

    def __repr__(self):
        return f"Series2({self.vars}; orders={self.orders})"

    def _coerce(self, other):
        if isinstance(other, Series2):
            if other.vars != self.vars:
                raise ValueError(f"mixing series in {self.vars} and {other.vars}")
            return other
        if _is_scalar(other):
            return Series2.constant(other, self.orders, self.vars, self.ctx)
        return NotImplemented

    def _pair(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return None, None
        n1 = min(self.orders[0], other.orders[0])
        n2 = min(self.orders[1], other.orders[1])
        return self.coeffs[: n1 + 1, : n2 + 1], other.coeffs[: n1 + 1, : n2 + 1]

    def __add__(self, other):
        if _is_scalar(other):
            arr = self.coeffs.copy()
            arr[0, 0] = arr[0, 0] + self.ctx.scalar(other)
            return self._new(arr)
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return self._new(a + b)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.coeffs)

    def __sub__(self, other):
        if _is_scalar(other):
            return self + (-self.ctx.scalar(other))
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return self._new(a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other):
            return self._new(self.coeffs * self.ctx.scalar(other))
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        n1, m = a.shape
        out = self.ctx.zeros(a.shape)
        for i in range(n1):
            if not np.any(a[i] != 0):
                continue
            for j in range(n1 - i):
                out[i + j] += np.convolve(a[i], b[j])[:m]
        return self._new(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_scalar(other):
            if self.ctx.abs(other) == 0:
                raise DivisionByNonUnit("division by zero scalar")
            return self._new(self.coeffs / self.ctx.scalar(other))
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        sa = self._new(a)
        sb = self._new(b)
        if self.ctx.abs(b[0, 0]) <= self.ctx.tol * sb.scale() or self.ctx.abs(b[0, 0]) == 0:
            raise DivisionByNonUnit("divisor has ~0 constant term")
        b0 = sb.row(0)
        rows = []
        for i in range(a.shape[0]):
            acc = sa.row(i)
            for j in range(1, i + 1):
                acc = acc - sb.row(j) * rows[i - j]
            rows.append(acc / b0)
        return self._new(np.array([r.coeffs for r in rows], dtype=self.ctx.dtype))

    def __rtruediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return Series2.constant(other, self.orders, self.vars, self.ctx) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("series powers must be integers")
        if n < 0:
            return (1 / self) ** (-n)
        result = Series2.constant(1, self.orders, self.vars, self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # composition with univariate outer functions
    def _total_order(self):
        return sum(self.orders)

    def substitute_into(self, outer: Series1) -> Series2:
        """``outer(self)`` for ``self`` with zero constant term.

        ``outer`` must reach total order ``N1 + N2`` for an exact rectangular
        truncation.
        """
        c0 = self.coeffs[0, 0]
        if self.ctx.abs(c0) > self.ctx.tol * max(1.0, self.scale()):
            raise NonZeroConstant("inner series has nonzero constant term")
        need = self._total_order()
        if outer.order < need:
            raise IndexOutOfOrder(f"outer series order {outer.order} < total order {need}")
        arr = self.coeffs.copy()
        arr[0, 0] = self.ctx.scalar(0)
        x = self._new(arr)
        acc = Series2.constant(outer.coeffs[need], self.orders, self.vars, self.ctx)
        for k in range(need - 1, -1, -1):
            acc = acc * x + outer.coeffs[k]
        return acc

    def _unit_parts(self):
        c0 = self.coeffs[0, 0]
        if self.ctx.abs(c0) <= self.ctx.tol * self.scale() or self.ctx.abs(c0) == 0:
            return c0, None
        return c0, (self / c0) - 1

    def exp(self) -> Series2:
        c0 = self.coeffs[0, 0]
        x = self - c0
        k = self._total_order()
        outer = Series1.variable(k, 0, "u", self.ctx).exp()
        return x.substitute_into(outer) * self.ctx.exp(c0)

    def log(self) -> Series2:
        c0, x = self._unit_parts()
        if x is None:
            raise LogOfZero("log of a series with ~0 constant term")
        k = self._total_order()
        outer = Series1.variable(k, 1, "u", self.ctx).log()
        out = x.substitute_into(outer)
        return out + self.ctx.log(c0)

    def root(self, n: int, branch: Branch | None = None) -> Series2:
        branch = Branch.principal() if branch is None else branch
        c0, x = self._unit_parts()
        if x is None:
            raise RootOfZero("root of a series with ~0 constant term")
        k = self._total_order()
        outer = Series1.variable(k, 1, "u", self.ctx).root(n)
        return x.substitute_into(outer) * branch.select(c0, n, self.ctx)

    def sqrt(self, branch: Branch | None = None) -> Series2:
        return self.root(2, branch)


# Function-style API mirroring the operations of the module contract.


def arith(op: str, a, b):
    ops = {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "mul": lambda: a * b,
        "div": lambda: a / b,
    }
    if op not in ops:
        raise ValueError(f"unknown arithmetic op {op!r}")
    return ops[op]()


def compose(outer: Series1, inner):
    if isinstance(inner, Series2):
        return inner.substitute_into(outer)
    return outer.compose(inner)


def revert(s: Series1) -> Series1:
    return s.revert()


def transcend(op: str, s):
    if op == "log":
        return s.log()
    if op == "exp":
        return s.exp()
    raise ValueError(f"unknown transcendental op {op!r}")


def nth_root(s, n: int, branch: Branch | None = None):
    return s.root(n, branch)


def calculus(op: str, s: Series1) -> Series1:
    if op == "differentiate":
        return s.derivative()
    if op == "integrate":
        return s.integral()
    raise ValueError(f"unknown calculus op {op!r}")


def extract(s, coeff=None, at=None):
    """Coefficient (``coeff=k`` or ``(i, j)``) or Horner value (``at=x`` or ``(x, y)``)."""
    if (coeff is None) == (at is None):
        raise ValueError("give exactly one of coeff= or at=")
    if coeff is not None:
        if isinstance(s, Series2):
            return s.coeff(*coeff)
        return s.coeff(coeff)
    if isinstance(s, Series2):
        return s(*at)
    return s(at)
