"""Formal Taylor expansion of lattice expressions and the scaling limit."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .errors import ScalingObstruction
from .lattice import LatticeExpr, Occurrence
from .symexpr import (
    ContinuumExpr,
    Deriv,
    h_coefficient,
    mul,
    reduce_mod_h,
    shift_h,
)


@dataclass(frozen=True)
class ExpansionOptions:
    """Spatial Taylor order, time scaling dt = h^scaling, and h-powers kept."""

    order: int = 2
    scaling: int = 1
    keep: int = 2

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be a positive integer")
        if self.scaling < 1:
            raise ValueError("scaling must be a positive integer")
        if self.keep < 0:
            raise ValueError("keep must be nonnegative")
        if self.order < self.scaling:
            raise ValueError(f"order {self.order} is below scaling {self.scaling}")
        if self.keep > self.order - self.scaling + 1:
            raise ValueError(
                f"keep={self.keep} exceeds order - scaling + 1 = {self.order - self.scaling + 1}"
            )


def _multi_indices(dim: int, max_total: int):
    for m in itertools.product(range(max_total + 1), repeat=dim):
        if sum(m) <= max_total:
            yield m


@lru_cache(maxsize=4096)
def taylor_occurrence(o: Occurrence, order: int) -> ContinuumExpr:
    """Sum over |m| <= order of h^|m| * prod(a_v^m_v / m_v!) * d^m c."""
    terms = {}
    for m in _multi_indices(len(o.offset), order):
        coeff = Fraction(1)
        for a, k in zip(o.offset, m):
            coeff *= Fraction(a**k, factorial(k))
        if coeff:
            atom = Deriv(o.species, m)
            terms[(sum(m), (), ((atom, 1),))] = coeff
    return ContinuumExpr._wrap(terms)


def _truncated_power(base: ContinuumExpr, n: int, below: int) -> ContinuumExpr:
    result = ContinuumExpr.const(1)
    for _ in range(n):
        result = mul(result, base, below)
    return result


def expand_lattice(e: LatticeExpr, order: int) -> ContinuumExpr:
    """Replace occurrences by their Taylor polynomials, reducing mod h^(order+1)
    after every product so no higher term is ever carried along."""
    below = order + 1
    total: dict = {}
    for m in e.normalized().monomials:
        term = ContinuumExpr._wrap({(0, m.params, ()): m.coeff})
        for occ, k in m.factors:
            term = mul(term, _truncated_power(taylor_occurrence(occ, order), k, below), below)
        for key, c in term.terms().items():
            total[key] = total.get(key, 0) + c
    return ContinuumExpr._wrap(total)


def vanishing_orders(e: ContinuumExpr, scaling: int) -> list[int]:
    """Check the coefficients of h^0 .. h^(scaling-1); return the powers verified zero.

    Raises ScalingObstruction on the first nonzero coefficient.
    """
    for p in range(scaling):
        coeff = h_coefficient(e, p)
        if not coeff.is_zero():
            raise ScalingObstruction(p, coeff)
    return list(range(scaling))


def take_limit(e: ContinuumExpr, opts: ExpansionOptions) -> ContinuumExpr:
    """Divide by dt = h^scaling and keep powers of h below ``opts.keep``."""
    vanishing_orders(e, opts.scaling)
    return reduce_mod_h(shift_h(e, -opts.scaling), opts.keep)
