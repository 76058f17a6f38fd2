"""Ground-truth coefficients and error reports.

Rational problems are cleared to ``F = P/Q`` with exact polynomial
coefficients, and ``[z^r w^s] F`` follows from the recurrence

    Q_{00} f_{r,s} = P_{r,s} - sum_{(j,k) != (0,0)} Q_{j,k} f_{r-j, s-k}.

Other problems fall back to extended-precision series division.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from .errors import CacheFormatError, NotAnalyticAtOrigin, OracleMissing
from .expansion import EstimateReport
from .expr import BinOp, Call, Expr, Neg, Num, Pow, Var, taylor
from .problem import Problem
from .series import _MP, EXTENDED

CACHE_VERSION = 1

# ---------------------------------------------------------------------------
# exact bivariate polynomials as {(i, j): Fraction}


def _padd(a, b, sign=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
        if out[k] == 0:
            del out[k]
    return out


def _pmul(a, b):
    out = {}
    for (i1, j1), v1 in a.items():
        for (i2, j2), v2 in b.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, 0) + v1 * v2
    return {k: v for k, v in out.items() if v != 0}


def _ppow(a, n):
    out = {(0, 0): Fraction(1)}
    for _ in range(n):
        out = _pmul(out, a)
    return out


_ONE = {(0, 0): Fraction(1)}


def rational_form(e: Expr):
    """``(numerator, denominator)`` polynomials of a rational expression."""
    if isinstance(e, Num):
        return ({(0, 0): e.value} if e.value != 0 else {}), dict(_ONE)
    if isinstance(e, Var):
        key = {"z": (1, 0), "w": (0, 1)}.get(e.name)
        if key is None:
            raise ValueError(f"unexpected variable {e.name}")
        return {key: Fraction(1)}, dict(_ONE)
    if isinstance(e, Neg):
        n, d = rational_form(e.arg)
        return {k: -v for k, v in n.items()}, d
    if isinstance(e, BinOp):
        n1, d1 = rational_form(e.left)
        n2, d2 = rational_form(e.right)
        if e.op == "+":
            return _padd(_pmul(n1, d2), _pmul(n2, d1)), _pmul(d1, d2)
        if e.op == "-":
            return _padd(_pmul(n1, d2), _pmul(n2, d1), -1), _pmul(d1, d2)
        if e.op == "*":
            return _pmul(n1, n2), _pmul(d1, d2)
        if e.op == "/":
            if not n2:
                raise ZeroDivisionError("division by the zero polynomial")
            return _pmul(n1, d2), _pmul(d1, n2)
    if isinstance(e, Pow):
        n, d = rational_form(e.base)
        k = e.exponent
        if k < 0:
            if not n:
                raise ZeroDivisionError("negative power of the zero polynomial")
            n, d, k = d, n, -k
        return _ppow(n, k), _ppow(d, k)
    if isinstance(e, Call):
        raise ValueError(f"{e.func} is not rational")
    raise TypeError(f"unknown node {e!r}")


def cleared_form(problem: Problem):
    """``(P, Q)`` with ``F = G/H = P/Q`` as exact polynomials."""
    gn, gd = rational_form(problem.G)
    hn, hd = rational_form(problem.H)
    return _pmul(gn, hd), _pmul(gd, hn)


# ---------------------------------------------------------------------------
# tables


@dataclass
class CoeffTable:
    """``f_{r,s}`` for ``0 <= r <= R``, ``0 <= s <= S``.

    ``precision`` is ``"exact"`` (values are int or Fraction) or
    ``"extended"`` (values are mpmath complex numbers).
    """

    R: int
    S: int
    values: list
    precision: str = "exact"
    problem_hash: str = ""

    def __call__(self, r: int, s: int):
        if not (0 <= r <= self.R and 0 <= s <= self.S):
            raise OracleMissing(f"table covers r <= {self.R}, s <= {self.S}; asked for ({r}, {s})")
        return self.values[r][s]

    def covers(self, r: int, s: int) -> bool:
        return 0 <= r <= self.R and 0 <= s <= self.S


def _as_int(x):
    return int(x) if isinstance(x, Fraction) and x.denominator == 1 else x


def _exact_table(P, Q, R, S):
    q00 = Q.get((0, 0), 0)
    if q00 == 0:
        raise NotAnalyticAtOrigin("denominator vanishes at the origin")
    q_terms = [(j, k, _as_int(v)) for (j, k), v in Q.items() if (j, k) != (0, 0) and j <= R and k <= S]
    integral = all(isinstance(v, int) for _, _, v in q_terms) and abs(q00) == 1 and all(
        v.denominator == 1 for v in P.values()
    )
    q00 = _as_int(q00)
    vals = [[0] * (S + 1) for _ in range(R + 1)]
    for r in range(R + 1):
        row = vals[r]
        for s in range(S + 1):
            acc = P.get((r, s), 0)
            acc = int(acc) if integral else acc
            for j, k, v in q_terms:
                if j <= r and k <= s:
                    acc -= v * vals[r - j][s - k]
            if integral:
                row[s] = acc * q00  # q00 is +-1
            else:
                row[s] = _as_int(Fraction(acc) / q00)
    return vals


def _extended_table(problem: Problem, R, S):
    try:
        G = taylor(problem.G, {"z": 0, "w": 0}, (R, S), EXTENDED)
        H = taylor(problem.H, {"z": 0, "w": 0}, (R, S), EXTENDED)
    except Exception as exc:
        raise NotAnalyticAtOrigin(f"cannot expand at the origin: {exc}") from exc
    if abs(H.coeff(0, 0)) == 0:
        raise NotAnalyticAtOrigin("H vanishes at the origin")
    F = G / H
    return [[F.coeff(r, s) for s in range(S + 1)] for r in range(R + 1)]


def coeff_table(problem: Problem, R: int, S: int) -> CoeffTable:
    """Coefficient table, exact when the problem is rational."""
    if problem.rational:
        P, Q = cleared_form(problem)
        vals = _exact_table(P, Q, R, S)
        return CoeffTable(R, S, vals, "exact", problem.digest())
    return CoeffTable(R, S, _extended_table(problem, R, S), "extended", problem.digest())


def convolution_residual(problem: Problem, table: CoeffTable):
    """Largest ``|sum Q_{jk} f_{r-j,s-k} - P_{rs}|`` over the table (exact zero in rational mode)."""
    if problem.rational:
        P, Q = cleared_form(problem)
        worst = 0
        for r in range(table.R + 1):
            for s in range(table.S + 1):
                acc = -P.get((r, s), 0)
                for (j, k), v in Q.items():
                    if j <= r and k <= s:
                        acc += v * table.values[r - j][s - k]
                worst = max(worst, abs(acc))
        return worst
    return hf_residual(problem, table)


def hf_residual(problem: Problem, table: CoeffTable):
    """Largest relative ``|[z^r w^s](H F - G)|`` using series expansions of ``G`` and ``H``."""
    ctx = EXTENDED
    R, S = table.R, table.S
    G = taylor(problem.G, {"z": 0, "w": 0}, (R, S), ctx)
    H = taylor(problem.H, {"z": 0, "w": 0}, (R, S), ctx)
    worst = mpmath.mpf(0)
    scale = max(max(abs(ctx.scalar(v)) for row in table.values for v in row), 1)
    for r in range(R + 1):
        for s in range(S + 1):
            acc = -G.coeff(r, s)
            for j in range(r + 1):
                for k in range(s + 1):
                    acc += H.coeff(j, k) * ctx.scalar(table.values[r - j][s - k])
            worst = max(worst, abs(acc))
    return float(worst / scale)


# ---------------------------------------------------------------------------
# closed forms


def delannoy(r: int, s: int) -> int:
    """Lattice paths with steps (1,0), (0,1), (1,1) from the origin to ``(r, s)``."""
    if r < 0 or s < 0:
        raise ValueError("delannoy needs r, s >= 0")
    row = [1] * (s + 1)
    for _ in range(r):
        new = [1] * (s + 1)
        for j in range(1, s + 1):
            new[j] = new[j - 1] + row[j] + row[j - 1]
        row = new
    return row[s]


@dataclass(frozen=True)
class LagrangeValue:
    """Value as ``sign * exp(log_modulus)`` with the exact integer when small."""

    sign: int
    log_modulus: float
    exact: int | None = None


EXACT_LIMIT = 400


def lagrange_exact(r: int, s: int) -> LagrangeValue:
    """``[x^r] (1-x)^{-s} (1-2x) = (s-r-1) (r+s-2)! / (r! (s-1)!)``."""
    if r < 0 or s < 1:
        raise ValueError("lagrange_exact needs r >= 0 and s >= 1")
    if r == 0:
        return LagrangeValue(1, 0.0, 1)
    lead = s - r - 1
    if lead == 0:
        return LagrangeValue(0, -math.inf, 0)
    sign = 1 if lead > 0 else -1
    if r + s <= EXACT_LIMIT:
        val = lead * math.factorial(r + s - 2) // (math.factorial(r) * math.factorial(s - 1))
        return LagrangeValue(sign, math.log(abs(val)), val)
    logm = math.log(abs(lead)) + math.lgamma(r + s - 1) - math.lgamma(r + 1) - math.lgamma(s)
    return LagrangeValue(sign, logm, None)


def lagrange_diagonal(r: int) -> int:
    """``-(2r-2)! / (r ((r-1)!)^2)``, the diagonal of :func:`lagrange_exact`."""
    return -math.factorial(2 * r - 2) // (r * math.factorial(r - 1) ** 2)


# ---------------------------------------------------------------------------
# cache


def save_table(path, table: CoeffTable, mode: str = "general") -> None:
    lines = [
        f"# bicoef coefficient table v{CACHE_VERSION}",
        f"hash {table.problem_hash}",
        f"mode {mode}",
        f"R {table.R} S {table.S}",
        f"precision {table.precision}",
    ]
    for r in range(table.R + 1):
        for s in range(table.S + 1):
            v = table.values[r][s]
            if table.precision == "exact":
                fr = Fraction(v)
                x = complex(float(fr))
                lines.append(f"{r} {s} {fr.numerator} {fr.denominator} | {x.real!r} {x.imag!r}")
            else:
                c = _MP.mpc(v)
                lines.append(f"{r} {s} - - | {_MP.nstr(c.real, 34)} {_MP.nstr(c.imag, 34)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_table(path, expected_hash: str | None = None) -> CoeffTable:
    text = Path(path).read_text().splitlines()
    try:
        if text[0] != f"# bicoef coefficient table v{CACHE_VERSION}":
            raise CacheFormatError(f"unsupported cache header {text[0]!r}")
        h = text[1].split()[1]
        R, S = int(text[3].split()[1]), int(text[3].split()[3])
        precision = text[4].split()[1]
    except (IndexError, ValueError) as exc:
        raise CacheFormatError(f"malformed cache header in {path}") from exc
    if expected_hash is not None and h != expected_hash:
        raise CacheFormatError(f"cache {path} belongs to a different problem")
    vals = [[None] * (S + 1) for _ in range(R + 1)]
    for ln, line in enumerate(text[5:], start=6):
        try:
            left, right = line.split("|")
            r, s, num, den = left.split()
            re_, im_ = right.split()
            r, s = int(r), int(s)
            if precision == "exact":
                vals[r][s] = _as_int(Fraction(int(num), int(den)))
            else:
                vals[r][s] = _MP.mpc(_MP.mpf(re_), _MP.mpf(im_))
        except (ValueError, IndexError) as exc:
            raise CacheFormatError(f"{path}:{ln}: malformed row") from exc
    if any(v is None for row in vals for v in row):
        raise CacheFormatError(f"cache {path} is missing rows")
    return CoeffTable(R, S, vals, precision, h)


def cached_table(problem: Problem, R: int, S: int, cache_dir=None) -> CoeffTable:
    """:func:`coeff_table` backed by an on-disk cache keyed by the problem hash."""
    if cache_dir is None:
        return coeff_table(problem, R, S)
    path = Path(cache_dir) / f"{problem.digest()[:16]}.table"
    if path.exists():
        try:
            t = load_table(path, problem.digest())
            if t.R >= R and t.S >= S:
                return t
        except CacheFormatError:
            pass
    t = coeff_table(problem, R, S)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_table(path, t, problem.mode)
    return t


# ---------------------------------------------------------------------------
# comparison


def _exact_parts(value):
    """``(log_modulus, phase)`` of an oracle value; ``(-inf, 0)`` for zero."""
    if isinstance(value, LagrangeValue):
        if value.sign == 0:
            return -math.inf, 0.0
        return value.log_modulus, 0.0 if value.sign > 0 else math.pi
    if isinstance(value, (int, Fraction)):
        if value == 0:
            return -math.inf, 0.0
        # log of a big rational without overflowing a float
        fr = Fraction(value)
        lm = _log_int(abs(fr.numerator)) - _log_int(fr.denominator)
        return lm, 0.0 if fr > 0 else math.pi
    c = mpmath.mpc(value)
    if c == 0:
        return -math.inf, 0.0
    return float(mpmath.log(abs(c))), float(mpmath.arg(c))


def _log_int(n: int) -> float:
    bits = n.bit_length()
    if bits < 1000:
        return math.log(n)
    shift = bits - 60
    return math.log(n >> shift) + shift * math.log(2)


@dataclass(frozen=True)
class ErrorRow:
    r: int
    s: int
    estimate: complex
    exact: complex
    rel_err: float
    floor: float
    verdict: bool
    exact_value: object = None


@dataclass
class ErrorReport:
    """Per-point errors in units of ``|zeta^-r omega^-s|``.

    ``estimate``, ``exact`` and ``floor`` are stored divided by
    ``|zeta^-r omega^-s|`` so that they stay representable.
    """

    rows: list = field(default_factory=list)
    threshold: float = 0.05

    @property
    def max(self) -> float | None:
        return max((r.rel_err for r in self.rows), default=None)

    @property
    def median(self) -> float | None:
        return statistics.median(r.rel_err for r in self.rows) if self.rows else None

    @property
    def trend(self) -> float | None:
        """Least-squares slope of ``log rel_err`` against ``log s``."""
        pts = [(math.log(r.s), math.log(r.rel_err)) for r in self.rows if r.rel_err > 0]
        xs = {x for x, _ in pts}
        if len(xs) < 2:
            return None
        mx = sum(x for x, _ in pts) / len(pts)
        my = sum(y for _, y in pts) / len(pts)
        num = sum((x - mx) * (y - my) for x, y in pts)
        den = sum((x - mx) ** 2 for x, _ in pts)
        return num / den

    @property
    def passed(self) -> bool:
        return all(r.verdict for r in self.rows)

    def summary(self) -> dict:
        return {"count": len(self.rows), "max": self.max, "median": self.median,
                "trend": self.trend, "passed": self.passed}


def compare(reports, oracle, threshold: float = 0.05) -> ErrorReport:
    """Compare estimates with an oracle.

    ``oracle`` is a :class:`CoeffTable` or a callable ``(r, s) -> value``
    returning an int, Fraction, complex or :class:`LagrangeValue`.
    """
    out = ErrorReport(threshold=threshold)
    for rep in reports:
        rep: EstimateReport
        if isinstance(oracle, CoeffTable) and not oracle.covers(rep.r, rep.s):
            raise OracleMissing(f"oracle table does not cover ({rep.r}, {rep.s})")
        try:
            value = oracle(rep.r, rep.s)
        except (KeyError, IndexError) as exc:
            raise OracleMissing(f"oracle has no value at ({rep.r}, {rep.s})") from exc
        lp = rep.log_prefactor
        ex_lm, ex_ph = _exact_parts(value)
        est_n = rep.bracket * complex(math.cos(lp.imag), math.sin(lp.imag))
        exact_n = 0j if ex_lm == -math.inf else complex(
            math.exp(ex_lm - lp.real) * math.cos(ex_ph), math.exp(ex_lm - lp.real) * math.sin(ex_ph)
        )
        floor = rep.s ** (-(rep.q + 1) / rep.n)
        rel = abs(est_n - exact_n) / (abs(exact_n) + floor)
        out.rows.append(ErrorRow(rep.r, rep.s, est_n, exact_n, rel, floor, rel <= threshold, value))
    out.rows.sort(key=lambda row: (row.s, row.r))
    return out
