"""Problem definition F = G/H and run configuration."""

from __future__ import annotations

import hashlib
from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property

from .expr import BinOp, Expr, Num, Var, diff, free_vars, is_rational, parse, substitute, to_text
from .series import Context

VARIABLES = ("z", "w")


@dataclass(frozen=True)
class Problem:
    """A bivariate meromorphic function ``F(z, w) = G(z, w) / H(z, w)``.

    ``mode`` records how the problem was specified; ``lagrange`` problems
    are built from ``U`` and ``V`` as ``F = V(z) / (1 - w U(z))`` so that
    ``[z^r w^s] F = [x^r] U(x)^s V(x)``.
    """

    G: Expr
    H: Expr
    mode: str = "general"
    name: str = ""

    def __post_init__(self):
        extra = (free_vars(self.G) | free_vars(self.H)) - set(VARIABLES)
        if extra:
            raise ValueError(f"unknown variables {sorted(extra)}; expressions may use z and w only")

    @classmethod
    def from_text(cls, G: str, H: str, name: str = "") -> Problem:
        return cls(parse(G), parse(H), "general", name)

    @classmethod
    def from_lagrange(cls, U: str | Expr, V: str | Expr, name: str = "") -> Problem:
        """``F = V(z) / (1 - w U(z))``; ``U`` and ``V`` may be written in ``x`` or ``z``."""
        U = parse(U) if isinstance(U, str) else U
        V = parse(V) if isinstance(V, str) else V
        for label, e in (("U", U), ("V", V)):
            bad = free_vars(e) - {"x", "z"}
            if bad:
                raise ValueError(f"{label} may only use the variable x (or z); found {sorted(bad)}")
        to_z = {"x": Var("z")}
        U, V = substitute(U, to_z), substitute(V, to_z)
        H = BinOp("-", Num(Fraction(1)), BinOp("*", Var("w"), U))
        return cls(V, H, "lagrange", name)

    @cached_property
    def Hz(self) -> Expr:
        return diff(self.H, "z")

    @cached_property
    def Hw(self) -> Expr:
        return diff(self.H, "w")

    @property
    def rational(self) -> bool:
        return is_rational(self.G) and is_rational(self.H)

    def canonical_text(self) -> str:
        return f"mode={self.mode};G={to_text(self.G)};H={to_text(self.H)}"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def delannoy_problem() -> Problem:
    return Problem.from_text("1", "1-z-w-z*w", name="delannoy")


def lagrange_problem() -> Problem:
    return Problem.from_lagrange("1/(1-x)", "1-2*x", name="lagrange")


@dataclass(frozen=True)
class Config:
    """Numerical settings shared by one analysis run.

    ``theta_order``/``delta_order`` are the truncation orders of the derived
    series; ``chart_order`` the order of the chart ``w = g(z)``; ``tol`` the
    relative threshold for "identically zero" decisions; ``cone`` an optional
    ``(lambda_min, lambda_max)`` interval of accepted directions.
    """

    theta_order: int = 24
    delta_order: int = 12
    chart_order: int = 48
    J: int = 6
    tol: float = 1e-9
    precision: str = "standard"
    cone: tuple[float, float] | None = None
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.theta_order < 2 or self.delta_order < 1:
            raise ValueError("theta_order must be >= 2 and delta_order >= 1")
        if self.J < 0:
            raise ValueError("J must be nonnegative")
        if self.cone is not None and not self.cone[0] < self.cone[1]:
            raise ValueError(f"empty cone {self.cone}")

    @property
    def ctx(self) -> Context:
        return Context(self.precision)
