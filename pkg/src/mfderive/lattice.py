"""Lattice models: occupancy polynomials, rate parsing and master equations.

A rate is written relative to the source site of a hop. ``r(1,0)`` is the
occupancy of species ``r`` one site ahead in the first lattice direction, bare
identifiers are parameters, and aliases such as ``rho = r + b`` are macros
expanded at parse time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import ModelError, RateSyntaxError
from .symexpr import PolyExpr

RESERVED = frozenset({"h", "t"})
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Occurrence(NamedTuple):
    """Occupancy of ``species`` at integer ``offset`` from the reference site."""

    species: str
    offset: tuple[int, ...]

    def shifted(self, v: Sequence[int]) -> "Occurrence":
        return Occurrence(self.species, tuple(a + b for a, b in zip(self.offset, v)))

    def text(self) -> str:
        return f"{self.species}({','.join(str(a) for a in self.offset)})"


class LatticeExpr(PolyExpr):
    """Polynomial in lattice occurrences with rational-times-parameter coefficients."""

    __slots__ = ()

    @classmethod
    def occ(cls, species: str, *offset: int):
        return cls.atom(Occurrence(species, tuple(offset)))

    @property
    def dimension(self) -> int | None:
        for m in self.monomials:
            for a, _ in m.factors:
                return len(a.offset)
        return None

    def to_text(self) -> str:
        return render_rate(self)


def shift(e: LatticeExpr, v: Sequence[int]) -> LatticeExpr:
    """Translate every occurrence offset by ``v``."""
    v = tuple(v)
    dim = e.dimension
    if dim is not None and len(v) != dim:
        raise ValueError(f"shift vector has length {len(v)}, expected {dim}")
    if not any(v):
        return e.normalized()
    acc = {}
    for (hp, params, factors), c in e.terms().items():
        moved = tuple(sorted((a.shifted(v), k) for a, k in factors))
        acc[(hp, params, moved)] = c
    return LatticeExpr._wrap(acc)


def negate_offsets(e: LatticeExpr) -> LatticeExpr:
    """Mirror image: every offset a becomes -a."""
    acc = {}
    for (hp, params, factors), c in e.terms().items():
        moved = tuple(
            sorted((Occurrence(a.species, tuple(-x for x in a.offset)), k) for a, k in factors)
        )
        acc[(hp, params, moved)] = c
    return LatticeExpr._wrap(acc)


def render_rate(e: LatticeExpr) -> str:
    """Render in the rate grammar so that ``parse_rate`` reads it back."""
    out = []
    for m in e.normalized().monomials:
        c = m.coeff
        factors = [p if k == 1 else f"{p}^{k}" for p, k in m.params]
        factors += [a.text() if k == 1 else f"{a.text()}^{k}" for a, k in m.factors]
        num = str(abs(c.numerator)) + ("" if c.denominator == 1 else f"/{c.denominator}")
        first = not out
        if abs(c) != 1 or not factors or (first and c < 0):
            factors.insert(0, ("-" if first and c < 0 else "") + num)
        body = "*".join(factors)
        if first:
            out.append(body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out) or "0"


# rate parser ------------------------------------------------------------------


class _Tok(NamedTuple):
    kind: str  # num, ident, op, end
    text: str
    pos: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+\.\d*|\.\d+)|(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(src: str) -> list[_Tok]:
    out = []
    pos = 0
    while True:
        m = _TOKEN_RE.match(src, pos)
        if not m or m.end() == m.start() or not src[pos:].strip():
            out.append(_Tok("end", "", len(src)))
            return out
        start = m.start(m.lastindex)
        dec, num, ident, op = m.groups()
        if dec is not None:
            out.append(_Tok("dec", dec, start))
        elif num is not None:
            out.append(_Tok("num", num, start))
        elif ident is not None:
            out.append(_Tok("ident", ident, start))
        elif op in "+-*/^(),":
            out.append(_Tok("op", op, start))
        else:
            raise RateSyntaxError(f"unexpected character {op!r}", start, src)
        pos = m.end()


class _Scope:
    """Name resolution for rate expressions."""

    def __init__(self, dimension, species, parameters, aliases):
        self.dimension = dimension
        self.species = set(species)
        self.parameters = set(parameters)
        self.aliases = dict(aliases)


class _RateParser:
    def __init__(self, src: str, scope: _Scope, template: bool = False):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.scope = scope
        self.template = template

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise RateSyntaxError(msg, tok.pos, self.src)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, op: str) -> bool:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str):
        if not self.accept(op):
            tok = self.peek()
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            self.error(f"expected {op!r}, found {found}")

    def parse(self) -> LatticeExpr:
        e = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return e

    def expr(self) -> LatticeExpr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = e + self.term()
            elif self.accept("-"):
                e = e - self.term()
            else:
                return e

    def term(self) -> LatticeExpr:
        e = self.factor()
        while self.accept("*"):
            e = e * self.factor()
        return e

    def factor(self) -> LatticeExpr:
        base = self.base()
        if self.accept("^"):
            tok = self.peek()
            if tok.kind == "op" and tok.text == "-":
                self.error("negative exponent not allowed")
            if tok.kind == "dec":
                self.error("fractional exponent not allowed")
            if tok.kind != "num":
                self.error("expected natural-number exponent")
            self.next()
            if self.peek().kind == "op" and self.peek().text == "/":
                self.error("fractional exponent not allowed")
            return base ** int(tok.text)
        return base

    def rational(self, negative: bool) -> LatticeExpr:
        tok = self.next()
        value = Fraction(int(tok.text))
        if self.accept("/"):
            den = self.peek()
            if den.kind != "num":
                self.error("expected denominator")
            self.next()
            if int(den.text) == 0:
                self.error("division by zero", den)
            value /= int(den.text)
        return LatticeExpr.const(-value if negative else value)

    def base(self) -> LatticeExpr:
        tok = self.peek()
        if tok.kind == "dec":
            self.error("decimal literals are not supported; write a fraction p/q")
        if tok.kind == "num":
            return self.rational(False)
        if tok.kind == "op" and tok.text == "-":
            self.next()
            if self.peek().kind != "num":
                self.error("'-' must be followed by a number here")
            return self.rational(True)
        if tok.kind == "op" and tok.text == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            self.next()
            if self.accept("("):
                return self.applied(tok, self.offsets())
            return self.bare(tok)
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        self.error(f"unexpected {found}")

    def offsets(self) -> tuple[int, ...]:
        vals = []
        while True:
            neg = self.accept("-")
            tok = self.peek()
            if tok.kind != "num":
                self.error("expected integer offset")
            self.next()
            vals.append(-int(tok.text) if neg else int(tok.text))
            if self.accept(")"):
                return tuple(vals)
            self.expect(",")

    def applied(self, tok: _Tok, offset: tuple[int, ...]) -> LatticeExpr:
        sc = self.scope
        name = tok.text
        if name not in sc.species and name not in sc.aliases:
            if name in sc.parameters:
                self.error(f"parameter {name!r} cannot take offsets", tok)
            self.error(f"unknown species or alias {name!r}", tok)
        if len(offset) != sc.dimension:
            self.error(
                f"{name!r} given {len(offset)} offsets, model dimension is {sc.dimension}", tok
            )
        if name in sc.species:
            return LatticeExpr.occ(name, *offset)
        return shift(sc.aliases[name], offset)

    def bare(self, tok: _Tok) -> LatticeExpr:
        sc = self.scope
        name = tok.text
        if name in sc.parameters:
            return LatticeExpr.param(name)
        if self.template and name in sc.species:
            return LatticeExpr.occ(name, *([0] * sc.dimension))
        if self.template and name in sc.aliases:
            return sc.aliases[name]
        if name in sc.species or name in sc.aliases:
            self.error(f"{name!r} needs lattice offsets, e.g. {name}({','.join(['0'] * sc.dimension)})", tok)
        self.error(f"unknown identifier {name!r}", tok)


# model --------------------------------------------------------------------------


@dataclass(frozen=True)
class Transition:
    species: str
    jump: tuple[int, ...]
    rate: LatticeExpr
    source: str = ""


@dataclass(frozen=True)
class Model:
    dimension: int
    variables: tuple[str, ...]
    species: tuple[str, ...]
    parameters: tuple[str, ...] = ()
    aliases: Mapping[str, LatticeExpr] = field(default_factory=dict)
    transitions: tuple[Transition, ...] = ()
    alias_sources: Mapping[str, str] = field(default_factory=dict)
    fingerprint: str | None = None

    def scope(self) -> _Scope:
        return _Scope(self.dimension, self.species, self.parameters, self.aliases)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "variables": list(self.variables),
            "species": list(self.species),
            "parameters": list(self.parameters),
            "aliases": {k: self.alias_sources.get(k) or render_rate(v) for k, v in self.aliases.items()},
            "transitions": [
                {"species": t.species, "jump": list(t.jump), "rate": t.source or render_rate(t.rate)}
                for t in self.transitions
            ],
        }


def parse_rate(src: str, m: Model | _Scope) -> LatticeExpr:
    """Parse ``src`` in the rate grammar against the names declared in ``m``."""
    scope = m.scope() if isinstance(m, Model) else m
    return _RateParser(src, scope).parse()


def _check_names(names: Iterable[str], path: str):
    for i, n in enumerate(names):
        if not isinstance(n, str) or not _IDENT.match(n):
            raise ModelError(f"invalid identifier {n!r}", f"{path}[{i}]")


def model_from_dict(data: Mapping, fingerprint: str | None = None) -> Model:
    """Validate a decoded model file and build a :class:`Model`."""
    dim = data["dimension"]
    variables = tuple(data.get("variables") or ("x", "y", "z")[:dim])
    species = tuple(data["species"])
    parameters = tuple(data.get("parameters", ()))
    alias_src = dict(data.get("aliases", {}))

    if len(variables) != dim:
        raise ModelError(f"{len(variables)} variables for dimension {dim}", "$.variables")
    spacing = data.get("spacing")
    if isinstance(spacing, list) and len(set(spacing)) > 1:
        raise ModelError("anisotropic lattice spacings are not supported", "$.spacing")
    _check_names(variables, "$.variables")
    _check_names(species, "$.species")
    _check_names(parameters, "$.parameters")
    _check_names(alias_src, "$.aliases")

    seen: dict[str, str] = {}
    for group, names in (
        ("variables", variables), ("species", species),
        ("parameters", parameters), ("aliases", tuple(alias_src)),
    ):
        for i, n in enumerate(names):
            if n in RESERVED:
                raise ModelError(f"{n!r} is reserved", f"$.{group}[{i}]" if group != "aliases" else f"$.aliases.{n}")
            if n in seen:
                raise ModelError(f"name {n!r} already declared in {seen[n]}", f"$.{group}")
            seen[n] = group

    aliases: dict[str, LatticeExpr] = {}
    for name, body in alias_src.items():
        if not isinstance(body, str):
            raise ModelError("alias body must be a string", f"$.aliases.{name}")
        scope = _Scope(dim, species, parameters, aliases)
        try:
            aliases[name] = _RateParser(body, scope, template=True).parse()
        except RateSyntaxError as exc:
            raise ModelError(str(exc), f"$.aliases.{name}") from exc

    transitions = []
    scope = _Scope(dim, species, parameters, aliases)
    for i, t in enumerate(data.get("transitions", ())):
        path = f"$.transitions[{i}]"
        if t["species"] not in species:
            raise ModelError(f"undeclared species {t['species']!r}", f"{path}.species")
        jump = tuple(t["jump"])
        if len(jump) != dim:
            raise ModelError(f"jump has length {len(jump)}, expected {dim}", f"{path}.jump")
        if not any(jump):
            raise ModelError("jump must be nonzero", f"{path}.jump")
        try:
            rate = _RateParser(t["rate"], scope).parse()
        except RateSyntaxError as exc:
            raise ModelError(str(exc), f"{path}.rate") from exc
        transitions.append(Transition(t["species"], jump, rate, t["rate"]))

    return Model(
        dimension=dim,
        variables=variables,
        species=species,
        parameters=parameters,
        aliases=aliases,
        transitions=tuple(transitions),
        alias_sources=alias_src,
        fingerprint=fingerprint,
    )


def build_master_rhs(m: Model, s: str) -> LatticeExpr:
    """Gain minus loss for species ``s`` at the reference site.

    For each hop of ``s`` with jump v and rate T (relative to the source site),
    the particle at -v arrives with rate T shifted by -v, and the particle at
    the reference site leaves with rate T.
    """
    if s not in m.species:
        raise ModelError(f"unknown species {s!r}", "$.species")
    here = LatticeExpr.occ(s, *([0] * m.dimension))
    total = LatticeExpr()
    for t in m.transitions:
        if t.species != s:
            continue
        outflow = t.rate * here
        total = total + shift(outflow, tuple(-a for a in t.jump)) - outflow
    return total
