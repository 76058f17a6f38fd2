"""Expression language for G, H, U and V.

Grammar (standard precedence, ``^`` binds tightest, binary operators are
left associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" ["-"] INTEGER)?
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := exp | log | sqrt

Numbers are kept as exact fractions (``0.25`` and ``1/4`` both stay
rational). Exponents must be integer literals; write general powers as
``exp(c*log(x))``.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import (
    EvalBranch,
    EvalPole,
    ExprSyntaxError,
    NotAnalyticAtCenter,
    SeriesError,
    UnboundVariable,
)
from .series import STANDARD, Context, Series1, Series2

FUNCTIONS = ("exp", "log", "sqrt")


# AST


class Expr:
    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: Fraction


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# Tokenizer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            pos = len(text)
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, expected):
        t = self.tok
        got = "end of input" if t.kind == "end" else repr(t.text)
        offset = len(self.text[: t.offset].encode("utf-8")) if t.kind != "end" else t.offset
        raise ExprSyntaxError(f"expected {expected}, got {got}", offset, expected)

    def expect(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        self.fail(repr(text))

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                sign = -1
            if self.tok.kind != "num" or not self.tok.text.isdigit():
                self.fail("integer exponent")
            exponent = sign * int(self.advance().text)
            if self.tok.kind == "op" and self.tok.text == "^":
                self.fail("operator other than a chained '^'")
            return Pow(base, exponent)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(Fraction(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            if self.tok.kind == "op" and self.tok.text == "(":
                self.fail(f"operator after {t.text!r} (unknown function)")
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expression")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree."""
    return _Parser(text).parse()


# Printing (canonical, fully parenthesized where needed)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(e: Expr) -> str:
    def fmt(node, parent_prec=0, right=False):
        if isinstance(node, Num):
            v = node.value
            s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
            if v.denominator != 1 and parent_prec >= 2:
                s = f"({s})"
            if v < 0 and parent_prec > 0:
                s = f"({s})"
            return s
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Neg):
            s = "-" + fmt(node.arg, 3)
            return f"({s})" if parent_prec > 0 else s
        if isinstance(node, BinOp):
            p = _PREC[node.op]
            s = f"{fmt(node.left, p)}{node.op}{fmt(node.right, p, True)}"
            if p < parent_prec or (p == parent_prec and right):
                s = f"({s})"
            return s
        if isinstance(node, Pow):
            base = fmt(node.base, 4)
            if isinstance(node.base, Pow):
                base = f"({base})"
            return f"{base}^{node.exponent}"
        if isinstance(node, Call):
            return f"{node.func}({fmt(node.arg)})"
        raise TypeError(node)

    return fmt(e)


# Structural queries


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Pow, Call)):
        return free_vars(e.arg if not isinstance(e, Pow) else e.base)
    return free_vars(e.left) | free_vars(e.right)


def is_rational(e: Expr) -> bool:
    """True when ``e`` is a rational function with rational coefficients."""
    if isinstance(e, Call):
        return False
    if isinstance(e, (Num, Var)):
        return True
    if isinstance(e, Neg):
        return is_rational(e.arg)
    if isinstance(e, Pow):
        return is_rational(e.base)
    return is_rational(e.left) and is_rational(e.right)


def substitute(e: Expr, mapping: dict[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exponent)
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, mapping))
    return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))


# Symbolic differentiation with light constant folding

_ZERO = Num(Fraction(0))
_ONE = Num(Fraction(1))


def _is_num(e, v=None):
    return isinstance(e, Num) and (v is None or e.value == v)


def _add(a, b):
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_num(b, 0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    if _is_num(a, 0):
        return _neg(b)
    return BinOp("-", a, b)


def _neg(a):
    if _is_num(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a, b):
    if _is_num(a, 0) or _is_num(b, 0):
        return _ZERO
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def _div(a, b):
    if _is_num(a, 0):
        return _ZERO
    if _is_num(b, 1):
        return a
    if _is_num(a) and _is_num(b) and b.value != 0:
        return Num(a.value / b.value)
    return BinOp("/", a, b)


def diff(e: Expr, var: str) -> Expr:
    """Partial derivative of ``e`` with respect to ``var``."""
    if isinstance(e, Num):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if e.name == var else _ZERO
    if isinstance(e, Neg):
        return _neg(diff(e.arg, var))
    if isinstance(e, BinOp):
        da, db = diff(e.left, var), diff(e.right, var)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, e.right), _mul(e.left, db))
        # quotient rule: (da*b - a*db)/b^2
        return _div(_sub(_mul(da, e.right), _mul(e.left, db)), Pow(e.right, 2))
    if isinstance(e, Pow):
        db = diff(e.base, var)
        if _is_num(db, 0) or e.exponent == 0:
            return _ZERO
        k = e.exponent
        inner = e.base if k - 1 == 1 else (_ONE if k - 1 == 0 else Pow(e.base, k - 1))
        return _mul(_mul(Num(Fraction(k)), inner), db)
    if isinstance(e, Call):
        da = diff(e.arg, var)
        if _is_num(da, 0):
            return _ZERO
        if e.func == "exp":
            return _mul(e, da)
        if e.func == "log":
            return _div(da, e.arg)
        if e.func == "sqrt":
            return _div(da, _mul(Num(Fraction(2)), e))
    raise TypeError(e)


# Evaluation over any algebra: Python/mpmath scalars, numpy arrays, Series


def _magnitude(x) -> float:
    if isinstance(x, (Series1, Series2)):
        return x.scale()
    if isinstance(x, np.ndarray):
        return float(np.max(np.abs(x))) if x.size else 0.0
    return float(abs(x))


def _min_magnitude(x) -> float:
    if isinstance(x, np.ndarray):
        return float(np.min(np.abs(x))) if x.size else 0.0
    return float(abs(x))


def _apply(func, x, ctx):
    if isinstance(x, (Series1, Series2)):
        return getattr(x, func)()
    if isinstance(x, np.ndarray):
        if func != "exp" and _min_magnitude(x) == 0:
            raise EvalBranch(f"{func} of 0")
        return getattr(np, func)(x.astype(complex))
    if isinstance(x, (mpmath.mpc, mpmath.mpf)) or ctx.extended:
        if func != "exp" and abs(x) == 0:
            raise EvalBranch(f"{func} of 0")
        return getattr(ctx, func)(ctx.scalar(x))
    if isinstance(x, Fraction):
        if ctx.exact:
            raise EvalBranch(f"{func} is unavailable in exact evaluation")
        x = complex(x)
    if func != "exp" and x == 0:
        raise EvalBranch(f"{func} of 0")
    return getattr(cmath, func)(x)


def evaluate(e: Expr, env: dict, ctx: Context = STANDARD, pole_tol: float = 1e-300):
    """Evaluate ``e`` with variables bound in ``env``.

    Values may be scalars, numpy arrays or series; constants are converted
    through ``ctx.scalar``. Divisions by an exactly (or below ``pole_tol``)
    zero scalar raise :class:`EvalPole`; series divisions defer to the
    series' own unit check.
    """

    def ev(node):
        if isinstance(node, Num):
            return ctx.scalar(node.value)
        if isinstance(node, Var):
            try:
                return env[node.name]
            except KeyError:
                raise UnboundVariable(f"variable {node.name!r} is not bound") from None
        if isinstance(node, Neg):
            return -ev(node.arg)
        if isinstance(node, BinOp):
            a = ev(node.left)
            b = ev(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if not isinstance(b, (Series1, Series2)) and _min_magnitude(b) <= pole_tol:
                raise EvalPole(f"division by ~0 in {to_text(node)}")
            return a / b
        if isinstance(node, Pow):
            b = ev(node.base)
            if node.exponent < 0 and not isinstance(b, (Series1, Series2)) and _min_magnitude(b) <= pole_tol:
                raise EvalPole(f"negative power of ~0 in {to_text(node)}")
            if isinstance(b, (Series1, Series2)):
                return b**node.exponent
            if isinstance(b, Fraction):
                return b**node.exponent
            if node.exponent < 0:
                return 1 / (b ** (-node.exponent))
            return b**node.exponent
        if isinstance(node, Call):
            return _apply(node.func, ev(node.arg), ctx)
        raise TypeError(node)

    return ev(e)


def eval_scalar(e: Expr, bindings: dict, ctx: Context = STANDARD):
    """Complex value of ``e`` at a point (principal branches for log and sqrt)."""
    env = {k: ctx.scalar(v) for k, v in bindings.items()}
    return evaluate(e, env, ctx)


def taylor(e: Expr, center: dict, orders, ctx: Context = STANDARD, var_names=None):
    """Truncated Taylor expansion of ``e`` about ``center``.

    One variable gives a :class:`Series1` (``orders`` an int); two give a
    :class:`Series2` whose axes follow the order of ``center``'s keys.
    """
    names = list(center)
    if len(names) == 1:
        n = orders if isinstance(orders, int) else orders[0]
        env = {names[0]: Series1.variable(n, center[names[0]], var_names or names[0], ctx)}
    elif len(names) == 2:
        vars2 = tuple(var_names or names)
        env = {
            names[0]: Series2.variable(0, orders, center[names[0]], vars2, ctx),
            names[1]: Series2.variable(1, orders, center[names[1]], vars2, ctx),
        }
    else:
        raise ValueError("taylor supports one or two variables")
    try:
        out = evaluate(e, env, ctx)
    except (SeriesError, EvalPole, EvalBranch) as exc:
        raise NotAnalyticAtCenter(f"{to_text(e)} is not analytic at {center}: {exc}") from exc
    if not isinstance(out, (Series1, Series2)):
        if len(names) == 1:
            out = Series1.constant(out, n, var_names or names[0], ctx)
        else:
            out = Series2.constant(out, orders, tuple(var_names or names), ctx)
    return out
