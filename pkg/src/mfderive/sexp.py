"""Canonical s-expression encoding of expressions, decompositions and PDE systems.

Grammar::

    expr   := (sum mono*)
    mono   := (mono NUM/DEN (h P) (par NAME E)* (dt FUNC (VAR ORDER)+ E)*)
    dec    := (dec expr (d VAR dec)*)
    system := (system (eq SPECIES dec)*)

The writer emits every variable in each ``dt`` clause, including zero orders,
so a file can be read back without knowing the variable names in advance.
Text after ``;`` up to the end of the line is a comment.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from .errors import SexpError
from .symexpr import ContinuumExpr, Deriv, Monomial, VarId, _pairs


def default_variable_names(dim: int) -> tuple[str, ...]:
    if dim <= 3:
        return ("x", "y", "z")[:dim]
    return tuple(f"x{i + 1}" for i in range(dim))


# reading ------------------------------------------------------------------------


def _tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, i
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            yield text[i:j], i
            i = j


def read(text: str):
    """Parse text into nested lists of string atoms."""
    tokens = list(_tokenize(text))
    if not tokens:
        raise SexpError("empty input")
    tree, i = _read_from(tokens, 0)
    if i != len(tokens):
        raise SexpError(f"trailing input at position {tokens[i][1]}")
    return tree


def _read_from(tokens, i):
    tok, pos = tokens[i]
    if tok == ")":
        raise SexpError(f"unexpected ')' at position {pos}")
    if tok != "(":
        return tok, i + 1
    out = []
    i += 1
    while True:
        if i >= len(tokens):
            raise SexpError(f"unclosed '(' at position {pos}")
        if tokens[i][0] == ")":
            return out, i + 1
        node, i = _read_from(tokens, i)
        out.append(node)


def _head(node, name: str):
    if not isinstance(node, list) or not node or node[0] != name:
        raise SexpError(f"expected ({name} ...), got {_show(node)}")
    return node[1:]


def _show(node) -> str:
    if isinstance(node, list):
        return "(" + " ".join(_show(n) for n in node) + ")"
    return node


def _int(tok, what: str) -> int:
    if isinstance(tok, list) or not re.fullmatch(r"-?\d+", tok):
        raise SexpError(f"expected integer {what}, got {_show(tok)}")
    return int(tok)


def _rational(tok) -> Fraction:
    if isinstance(tok, list) or not re.fullmatch(r"-?\d+/\d+", tok):
        raise SexpError(f"expected coefficient NUM/DEN, got {_show(tok)}")
    num, den = tok.split("/")
    if int(den) == 0:
        raise SexpError("zero denominator")
    return Fraction(int(num), int(den))


def _first_dt_names(tree):
    if not isinstance(tree, list):
        return None
    if tree and tree[0] == "dt" and len(tree) >= 4:
        return [p[0] for p in tree[2:-1] if isinstance(p, list) and p]
    for node in tree:
        found = _first_dt_names(node)
        if found is not None:
            return found
    return None


class _VarTable:
    """Variable names to indices; inferred from the first ``dt`` clause if not given."""

    def __init__(self, names: Sequence[str] | None, tree=None):
        self.inferred = names is None
        if names is None and tree is not None:
            names = _first_dt_names(tree)
        self.names = list(names) if names is not None else None

    def orders(self, pairs) -> tuple[int, ...]:
        named = []
        for p in pairs:
            if not isinstance(p, list) or len(p) != 2 or isinstance(p[0], list):
                raise SexpError(f"expected (VAR ORDER), got {_show(p)}")
            k = _int(p[1], "derivative order")
            if k < 0:
                raise SexpError("negative derivative order")
            named.append((p[0], k))
        if self.names is None:
            self.names = [n for n, _ in named]
        out = [0] * len(self.names)
        seen = set()
        for n, k in named:
            if n not in self.names:
                raise SexpError(f"unknown variable {n!r}")
            if n in seen:
                raise SexpError(f"variable {n!r} repeated")
            seen.add(n)
            out[self.names.index(n)] = k
        return tuple(out)

    def var(self, name) -> VarId:
        if isinstance(name, list):
            raise SexpError(f"expected variable name, got {_show(name)}")
        if self.names is None:
            self.names = []
        if name not in self.names:
            if self.inferred:
                self.names.append(name)
                return VarId(name, len(self.names) - 1)
            raise SexpError(f"unknown variable {name!r}")
        return VarId(name, self.names.index(name))


def _expr_from(node, vt: _VarTable) -> ContinuumExpr:
    monos = []
    for mono in _head(node, "sum"):
        body = _head(mono, "mono")
        if not body:
            raise SexpError("monomial without coefficient")
        coeff = _rational(body[0])
        h_power = 0
        params, factors = [], []
        for item in body[1:]:
            if not isinstance(item, list) or not item:
                raise SexpError(f"unexpected {_show(item)} in monomial")
            tag = item[0]
            if tag == "h" and len(item) == 2:
                h_power = _int(item[1], "h power")
            elif tag == "par" and len(item) == 3:
                params.append((item[1], _int(item[2], "exponent")))
            elif tag == "dt" and len(item) >= 4:
                orders = vt.orders(item[2:-1])
                factors.append((Deriv(item[1], orders), _int(item[-1], "exponent")))
            else:
                raise SexpError(f"malformed clause {_show(item)}")
        if h_power < 0 or any(e <= 0 for _, e in params + factors):
            raise SexpError("exponents must be positive")
        monos.append(
            Monomial(coeff, h_power, _pairs(params), _pairs(factors))
        )
    return ContinuumExpr(monos).normalized()


def _dec_from(node, vt: _VarTable):
    from .conserve import Decomposition

    body = _head(node, "dec")
    if not body:
        raise SexpError("decomposition without remainder")
    remainder = _expr_from(body[0], vt)
    parts = []
    for part in body[1:]:
        args = _head(part, "d")
        if len(args) != 2:
            raise SexpError(f"malformed part {_show(part)}")
        parts.append((vt.var(args[0]), _dec_from(args[1], vt)))
    return Decomposition(remainder, tuple(parts))


def parse_expr(text: str, variables: Sequence[str] | None = None) -> ContinuumExpr:
    tree = read(text)
    return _expr_from(tree, _VarTable(variables, tree))


def parse_decomposition(text: str, variables: Sequence[str] | None = None):
    tree = read(text)
    return _dec_from(tree, _VarTable(variables, tree))


def parse_system(text: str, variables: Sequence[str] | None = None) -> dict:
    """Read ``(system (eq SPECIES dec)*)`` into an ordered species -> Decomposition map."""
    tree = read(text)
    vt = _VarTable(variables, tree)
    out = {}
    for eq in _head(tree, "system"):
        args = _head(eq, "eq")
        if len(args) != 2 or isinstance(args[0], list):
            raise SexpError(f"malformed equation {_show(eq)}")
        if args[0] in out:
            raise SexpError(f"species {args[0]!r} listed twice")
        node = args[1]
        if isinstance(node, list) and node and node[0] == "sum":
            from .conserve import Decomposition

            out[args[0]] = Decomposition(_expr_from(node, vt))
        else:
            out[args[0]] = _dec_from(node, vt)
    return out


def parse_any(text: str, variables: Sequence[str] | None = None):
    """Parse a sum, dec or system, dispatching on the head symbol."""
    tree = read(text)
    head = tree[0] if isinstance(tree, list) and tree else None
    vt = _VarTable(variables, tree)
    if head == "sum":
        return _expr_from(tree, vt)
    if head == "dec":
        return _dec_from(tree, vt)
    if head == "system":
        return parse_system(text, variables)
    raise SexpError(f"unknown top-level form {_show(tree)[:40]}")


# writing ------------------------------------------------------------------------


def _names_for(dim: int | None, variables) -> Sequence[str]:
    if variables is not None:
        return [v.name if isinstance(v, VarId) else v for v in variables]
    return default_variable_names(dim or 0)


def dump_expr(e: ContinuumExpr, variables=None) -> str:
    names = _names_for(e.dimension, variables)
    out = []
    for m in e.normalized().monomials:
        parts = [f"(mono {m.coeff.numerator}/{m.coeff.denominator}", f"(h {m.h_power})"]
        for p, ex in m.params:
            parts.append(f"(par {p} {ex})")
        for atom, ex in m.factors:
            if len(atom.orders) != len(names):
                raise SexpError(
                    f"{atom.func} has {len(atom.orders)} orders but {len(names)} variables given"
                )
            orders = " ".join(f"({n} {k})" for n, k in zip(names, atom.orders))
            parts.append(f"(dt {atom.func} {orders} {ex})")
        out.append(" ".join(parts) + ")")
    return "(sum" + "".join(" " + s for s in out) + ")"


def _dim_of_dec(dec) -> int | None:
    d = dec.remainder.dimension
    if d is not None:
        return d
    for _, inner in dec.parts:
        d = _dim_of_dec(inner)
        if d is not None:
            return d
    return None


def dump_decomposition(dec, variables=None) -> str:
    if variables is None:
        dim = _dim_of_dec(dec)
        variables = default_variable_names(dim or 0)
    names = _names_for(None, variables)
    out = "(dec " + dump_expr(dec.remainder, names)
    for var, inner in dec.parts:
        out += f" (d {var.name} {dump_decomposition(inner, names)})"
    return out + ")"


def dump_system(entries, variables=None) -> str:
    """``entries``: iterable of (species, Decomposition)."""
    body = "".join(
        f" (eq {s} {dump_decomposition(dec, variables)})" for s, dec in entries
    )
    return "(system" + body + ")"
