"""Exact-arithmetic differential polynomials.

A :class:`ContinuumExpr` is a finite sum of monomials

    coeff * h^p * prod(param^e) * prod((d^k f)^e)

with rational coefficients, where every partial derivative ``d^k f`` of an
unspecified function is an independent indeterminate (a :class:`Deriv`).
Expressions are immutable. All arithmetic returns normalized expressions:
like monomials merged, zero coefficients dropped, canonical order applied.

The monomial machinery is shared with the lattice polynomials in
:mod:`mfderive.lattice`, which use lattice occurrences instead of derivatives
as their indeterminates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Union

from .errors import MissingAssignment

Rational = Union[int, Fraction]


class VarId(NamedTuple):
    """A continuum coordinate: its name and its position in the variable order."""

    name: str
    index: int


class Deriv(NamedTuple):
    """The indeterminate ``d^orders func``; orders has one entry per variable."""

    func: str
    orders: tuple[int, ...]

    @property
    def order(self) -> int:
        return sum(self.orders)

    def bump(self, v: int, k: int = 1) -> "Deriv":
        orders = list(self.orders)
        orders[v] += k
        return Deriv(self.func, tuple(orders))

    def is_pure(self, v: int) -> bool:
        """True if every nonzero order sits at variable index ``v``."""
        return all(k == 0 for i, k in enumerate(self.orders) if i != v)


def _vindex(v) -> int:
    return v.index if isinstance(v, VarId) else int(v)


def variables(names: Iterable[str]) -> tuple[VarId, ...]:
    return tuple(VarId(n, i) for i, n in enumerate(names))


# Shared monomial machinery ---------------------------------------------------

Pairs = tuple  # sorted tuple of (symbol, positive exponent)
Key = tuple  # (h_power, params pairs, factor pairs)


@dataclass(frozen=True)
class Monomial:
    """One term. ``factors`` maps indeterminates (Deriv or Occurrence) to exponents."""

    coeff: Fraction
    h_power: int = 0
    params: Pairs = ()
    factors: Pairs = ()

    @property
    def key(self) -> Key:
        return (self.h_power, self.params, self.factors)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.factors)

    def exponent(self, atom) -> int:
        for a, e in self.factors:
            if a == atom:
                return e
        return 0


def _sort_key(key: Key):
    h, params, factors = key
    return (
        h,
        sum(e for _, e in factors),
        tuple((a[0], a[1], e) for a, e in factors),
        params,
    )


def _combine(p: Pairs, q: Pairs) -> Pairs:
    if not p:
        return q
    if not q:
        return p
    merged = dict(p)
    for k, e in q:
        merged[k] = merged.get(k, 0) + e
    return tuple(sorted(merged.items()))


def _pairs(mapping) -> Pairs:
    if isinstance(mapping, Mapping):
        mapping = mapping.items()
    merged: dict = {}
    for k, e in mapping:
        if e < 0 or int(e) != e:
            raise ValueError(f"exponent of {k!r} must be a nonnegative integer, got {e!r}")
        if e:
            merged[k] = merged.get(k, 0) + int(e)
    return tuple(sorted(merged.items()))


class PolyExpr:
    """Immutable polynomial over rational numbers; base of both expression kinds."""

    __slots__ = ("_monos", "_normal")

    def __init__(self, monomials: Iterable[Monomial] = ()):
        self._monos = tuple(monomials)
        self._normal = not self._monos

    @classmethod
    def _wrap(cls, terms: Mapping[Key, Fraction]):
        out = cls.__new__(cls)
        items = [(k, c) for k, c in terms.items() if c]
        items.sort(key=lambda kc: _sort_key(kc[0]))
        out._monos = tuple(Monomial(Fraction(c), *k) for k, c in items)
        out._normal = True
        return out

    @classmethod
    def from_terms(cls, terms: Iterable[Monomial]):
        """Build an expression from monomials, merging them."""
        acc: dict[Key, Fraction] = {}
        for m in terms:
            acc[m.key] = acc.get(m.key, 0) + m.coeff
        return cls._wrap(acc)

    @classmethod
    def const(cls, c: Rational):
        c = Fraction(c)
        return cls._wrap({(0, (), ()): c})

    @classmethod
    def param(cls, name: str, exponent: int = 1):
        return cls._wrap({(0, _pairs({name: exponent}), ()): Fraction(1)})

    @classmethod
    def atom(cls, a, exponent: int = 1):
        return cls._wrap({(0, (), _pairs({a: exponent})): Fraction(1)})

    # views -------------------------------------------------------------------

    @property
    def monomials(self) -> tuple[Monomial, ...]:
        return self._monos

    def normalized(self):
        if self._normal:
            return self
        return type(self).from_terms(self._monos)

    def terms(self) -> dict[Key, Fraction]:
        return {m.key: m.coeff for m in self.normalized()._monos}

    def is_zero(self) -> bool:
        return not self.normalized()._monos

    def __len__(self) -> int:
        return len(self.normalized()._monos)

    def __iter__(self):
        return iter(self.normalized()._monos)

    def atoms(self) -> set:
        return {a for m in self._monos for a, _ in m.factors}

    def parameters(self) -> set[str]:
        return {p for m in self._monos for p, _ in m.params}

    def max_h_power(self) -> int:
        return max((m.h_power for m in self.normalized()._monos), default=0)

    # arithmetic --------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, (int, Fraction)):
            return type(self).const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = self.terms()
        for k, c in other.terms().items():
            acc[k] = acc.get(k, 0) + c
        return type(self)._wrap(acc)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._wrap({k: -c for k, c in self.terms().items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return scale(self, other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return scale(self, Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = type(self).const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = type(self).const(other)
        if not isinstance(other, type(self)):
            return NotImplemented
        return self.normalized()._monos == other.normalized()._monos

    def __hash__(self):
        return hash((type(self).__name__, self.normalized()._monos))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"{type(self).__name__}({self.to_text()!r})"

    def __str__(self):
        return self.to_text()

    def to_text(self) -> str:
        from .render import expr_text

        return expr_text(self)


class ContinuumExpr(PolyExpr):
    """Differential polynomial graded by powers of h."""

    __slots__ = ()

    @classmethod
    def h(cls, power: int = 1):
        return cls._wrap({(power, (), ()): Fraction(1)})

    @classmethod
    def deriv(cls, func: str, orders: Iterable[int], exponent: int = 1):
        return cls.atom(Deriv(func, tuple(orders)), exponent)

    @classmethod
    def function(cls, func: str, dimension: int):
        return cls.deriv(func, (0,) * dimension)

    @property
    def dimension(self) -> int | None:
        for m in self._monos:
            for a, _ in m.factors:
                return len(a.orders)
        return None

    def functions(self) -> set[str]:
        return {a.func for a in self.atoms()}


@dataclass(frozen=True)
class JetPoint:
    """Rational values for parameters, h and derivative indeterminates."""

    params: Mapping[str, Fraction] = field(default_factory=dict)
    h: Fraction | None = None
    jet: Mapping[Deriv, Fraction] = field(default_factory=dict)


# operations -------------------------------------------------------------------


def normalize(e: PolyExpr) -> PolyExpr:
    return e.normalized()


def add(a: PolyExpr, b: PolyExpr) -> PolyExpr:
    return a + b


def scale(a: PolyExpr, c: Rational) -> PolyExpr:
    c = Fraction(c)
    if not c:
        return type(a)()
    return type(a)._wrap({k: v * c for k, v in a.terms().items()})


def mul(a: PolyExpr, b: PolyExpr, h_below: int | None = None) -> PolyExpr:
    """Product of ``a`` and ``b``; with ``h_below`` set, terms with h^p, p >= h_below,
    are never formed."""
    ta, tb = a.terms(), b.terms()
    acc: dict[Key, Fraction] = {}
    for (ha, pa, fa), ca in ta.items():
        for (hb, pb, fb), cb in tb.items():
            hp = ha + hb
            if h_below is not None and hp >= h_below:
                continue
            key = (hp, _combine(pa, pb), _combine(fa, fb))
            acc[key] = acc.get(key, 0) + ca * cb
    return type(a)._wrap(acc)


def equal(a: PolyExpr, b: PolyExpr) -> bool:
    return (a - b).is_zero()


def total_derivative(e: ContinuumExpr, v) -> ContinuumExpr:
    """Derivative with respect to variable ``v`` by the Leibniz rule."""
    v = _vindex(v)
    acc: dict[Key, Fraction] = {}
    for (hp, params, factors), c in e.terms().items():
        for idx, (atom, ex) in enumerate(factors):
            rest = dict(factors)
            if ex == 1:
                del rest[atom]
            else:
                rest[atom] = ex - 1
            bumped = atom.bump(v)
            rest[bumped] = rest.get(bumped, 0) + 1
            key = (hp, params, tuple(sorted(rest.items())))
            acc[key] = acc.get(key, 0) + c * ex
    return ContinuumExpr._wrap(acc)


def coefficient_of_power(e: PolyExpr, t, m: int) -> PolyExpr:
    """Sum of monomials containing ``t`` with exponent exactly ``m``, divided by t^m.

    ``m = 0`` gives the ``t``-free part.
    """
    acc: dict[Key, Fraction] = {}
    for (hp, params, factors), c in e.terms().items():
        ex = 0
        for a, k in factors:
            if a == t:
                ex = k
                break
        if ex != m:
            continue
        if m:
            factors = tuple((a, k) for a, k in factors if a != t)
        key = (hp, params, factors)
        acc[key] = acc.get(key, 0) + c
    return type(e)._wrap(acc)


def highest_exponent(e: PolyExpr, t) -> int:
    return max((m.exponent(t) for m in e.normalized().monomials), default=0)


def highest_pure_order(e: ContinuumExpr, v) -> int:
    """Largest i such that some pure derivative d_v^i f occurs in ``e``."""
    v = _vindex(v)
    best = 0
    for m in e.normalized().monomials:
        for a, _ in m.factors:
            if a.orders[v] > best and a.is_pure(v):
                best = a.orders[v]
    return best


def reduce_mod_h(e: ContinuumExpr, k: int) -> ContinuumExpr:
    """Drop every monomial with h-power >= k."""
    return type(e)._wrap({key: c for key, c in e.terms().items() if key[0] < k})


def h_coefficient(e: ContinuumExpr, p: int) -> ContinuumExpr:
    """Coefficient of h^p, as an h-free expression."""
    return type(e)._wrap(
        {(0, key[1], key[2]): c for key, c in e.terms().items() if key[0] == p}
    )


def shift_h(e: ContinuumExpr, s: int) -> ContinuumExpr:
    """Multiply by h^s; negative ``s`` requires all h-powers to stay nonnegative."""
    terms = e.terms()
    if any(key[0] + s < 0 for key in terms):
        raise ValueError(f"cannot divide by h^{-s}: lower powers present")
    return type(e)._wrap({(key[0] + s, key[1], key[2]): c for key, c in terms.items()})


def eval_at_jet(e: ContinuumExpr, p: JetPoint) -> Fraction:
    """Exact value of ``e`` under ``p``, evaluated term by term without normalizing."""
    total = Fraction(0)
    for m in e.monomials:
        value = Fraction(m.coeff)
        if m.h_power:
            if p.h is None:
                raise MissingAssignment("h")
            value *= Fraction(p.h) ** m.h_power
        for name, ex in m.params:
            if name not in p.params:
                raise MissingAssignment(name)
            value *= Fraction(p.params[name]) ** ex
        for atom, ex in m.factors:
            if atom not in p.jet:
                raise MissingAssignment(atom_name(atom))
            value *= Fraction(p.jet[atom]) ** ex
        total += value
    return total


def atom_name(atom) -> str:
    if isinstance(atom, Deriv):
        if not any(atom.orders):
            return atom.func
        return f"d{list(atom.orders)} {atom.func}"
    return repr(atom)


# convenience constructors --------------------------------------------------------


def const(c: Rational) -> ContinuumExpr:
    return ContinuumExpr.const(c)


def param(name: str) -> ContinuumExpr:
    return ContinuumExpr.param(name)


def hpow(power: int = 1) -> ContinuumExpr:
    return ContinuumExpr.h(power)


def deriv(func: str, *orders: int) -> ContinuumExpr:
    return ContinuumExpr.deriv(func, orders)


def zero() -> ContinuumExpr:
    return ContinuumExpr()
