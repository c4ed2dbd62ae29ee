"""Decomposition of differential polynomials into nested total derivatives.

``partial_integrate`` splits an expression E as

    E = d_x(I_x) + d_y(I_y) + ... + R

working through the variables in the given order, and optionally decomposing
each integrable part I again, up to a requested nesting depth. Pivots are pure
derivatives d_x^i f_j processed from the highest order down and, at each
order, in the given function order. Nonlinear occurrences of a pivot cannot be
integrated and go straight to the remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NotInDiffusionForm, UnlistedFunction
from .symexpr import (
    ContinuumExpr,
    Deriv,
    VarId,
    coefficient_of_power,
    highest_exponent,
    highest_pure_order,
    mul,
    total_derivative,
)


@dataclass(frozen=True)
class Decomposition:
    """``remainder + sum(d_var(flatten(inner)) for var, inner in parts)``."""

    remainder: ContinuumExpr
    parts: tuple[tuple[VarId, "Decomposition"], ...] = ()

    @property
    def depth(self) -> int:
        return 1 + max((inner.depth for _, inner in self.parts), default=-1)

    def __str__(self):
        from .render import decomposition_text

        return decomposition_text(self)


@dataclass(frozen=True)
class IntegrationOrder:
    funcs: tuple[str, ...]
    vars: tuple[VarId, ...]
    depth: int = 1

    def __post_init__(self):
        object.__setattr__(self, "funcs", tuple(self.funcs))
        vs = tuple(VarId(v, i) if isinstance(v, str) else v for i, v in enumerate(self.vars))
        object.__setattr__(self, "vars", vs)
        if not self.funcs or not self.vars:
            raise ValueError("function and variable lists must be nonempty")
        if len(set(self.funcs)) != len(self.funcs):
            raise ValueError("duplicate function in integration order")
        if len({v.name for v in vs}) != len(vs):
            raise ValueError("duplicate variable in integration order")
        if self.depth < 1:
            raise ValueError("depth must be a positive integer")


@dataclass
class PivotTrace:
    """Bookkeeping for one pivot d_var^order func of one pass."""

    var: str
    order: int
    func: str
    swept: int = 0
    iterations: int = 0
    first_exponent: int | None = None


def _pure(func: str, v: int, k: int, dim: int) -> Deriv:
    orders = [0] * dim
    orders[v] = k
    return Deriv(func, tuple(orders))


def partial_integrate(
    E: ContinuumExpr,
    order: IntegrationOrder,
    trace: list | None = None,
) -> Decomposition:
    """Decompose ``E`` into nested derivatives plus a remainder.

    With ``trace`` given, one :class:`PivotTrace` per visited pivot is appended.
    """
    E = E.normalized()
    unlisted = E.functions() - set(order.funcs)
    if unlisted:
        raise UnlistedFunction(
            f"functions not in the integration order: {', '.join(sorted(unlisted))}"
        )
    return _integrate(E, order.funcs, order.vars, order.depth, trace)


def _integrate(E, funcs, vars_, d, trace) -> Decomposition:
    if E.is_zero() or not vars_ or d == 0:
        return Decomposition(E)
    x = vars_[0]
    n = highest_pure_order(E, x)
    if n == 0:
        return _integrate(E, funcs, vars_[1:], d, trace)
    dim = E.dimension
    R = ContinuumExpr()
    I = ContinuumExpr()
    for i in range(n, 0, -1):
        for f in funcs:
            pivot = _pure(f, x.index, i, dim)
            lower = _pure(f, x.index, i - 1, dim)
            pivot_expr = ContinuumExpr.atom(pivot)
            lower_expr = ContinuumExpr.atom(lower)
            rec = PivotTrace(x.name, i, f) if trace is not None else None

            m = highest_exponent(E, pivot)
            while m >= 2:
                g = coefficient_of_power(E, pivot, m)
                chunk = mul(g, ContinuumExpr.atom(pivot, m))
                R = R + chunk
                E = E - chunk
                m = highest_exponent(E, pivot)
                if rec:
                    rec.swept += 1

            g = coefficient_of_power(E, pivot, 1)
            while not g.is_zero():
                m = highest_exponent(g, lower)
                w = Fraction(1, m + 1)
                I = I + w * mul(lower_expr, g)
                E = E - w * (mul(pivot_expr, g) + mul(lower_expr, total_derivative(g, x)))
                g = coefficient_of_power(E, pivot, 1)
                if rec:
                    if rec.first_exponent is None:
                        rec.first_exponent = m
                    rec.iterations += 1
            if rec:
                trace.append(rec)
    R = R + E
    inner = _integrate(I, funcs, vars_, d - 1, trace)
    rest = _integrate(R, funcs, vars_[1:], d, trace)
    parts = rest.parts
    if not I.is_zero():
        parts = ((x, inner),) + parts
    return Decomposition(rest.remainder, parts)


def flatten(dec: Decomposition) -> ContinuumExpr:
    out = dec.remainder.normalized()
    for var, inner in dec.parts:
        out = out + total_derivative(flatten(inner), var)
    return out


def extract_diffusivity(rhs: ContinuumExpr, c: str, v) -> ContinuumExpr:
    """Return D(c) such that ``rhs == d_v(D(c) d_v c)``.

    Raises NotInDiffusionForm with the residual when no such D exists.
    """
    vi = v.index if isinstance(v, VarId) else int(v)
    dim = rhs.dimension or vi + 1
    bare = _pure(c, vi, 0, dim)
    first = ContinuumExpr.atom(_pure(c, vi, 1, dim))
    D = coefficient_of_power(rhs, _pure(c, vi, 2, dim), 1)
    if any(a != bare for a in D.atoms()):
        raise NotInDiffusionForm(rhs, "coefficient of the second derivative involves derivatives")
    residual = rhs - total_derivative(mul(D, first), vi)
    if not residual.is_zero():
        raise NotInDiffusionForm(residual)
    return D


def default_order(funcs: Sequence[str], vars_: Sequence[str], depth: int = 2) -> IntegrationOrder:
    return IntegrationOrder(tuple(funcs), tuple(vars_), depth)
