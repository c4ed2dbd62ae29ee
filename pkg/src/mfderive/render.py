"""Plain-text, LaTeX, s-expression and JSON rendering."""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .sexp import default_variable_names, dump_decomposition, dump_expr, dump_system
from .symexpr import ContinuumExpr, Deriv, Monomial, PolyExpr

FORMATS = ("latex", "text", "sexp", "json")

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota",
    "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon",
    "phi", "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi",
    "Sigma", "Upsilon", "Phi", "Psi", "Omega",
}


def _var_names(e, variables):
    if variables is not None:
        return [getattr(v, "name", v) for v in variables]
    dim = e.dimension if isinstance(e, ContinuumExpr) else None
    return list(default_variable_names(dim or 0))


def _signed_terms(e: PolyExpr, body):
    """Yield (negative, text) for each monomial; ``body`` renders |coeff| * factors."""
    for m in e.normalized().monomials:
        yield m.coeff < 0, body(m, abs(m.coeff))


def _join(chunks) -> str:
    out = ""
    for neg, text in chunks:
        if not out:
            out = ("-" if neg else "") + text
        else:
            out += (" - " if neg else " + ") + text
    return out or "0"


# plain text --------------------------------------------------------------------


def _num_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _pow_text(base: str, e: int) -> str:
    return base if e == 1 else f"{base}^{e}"


def deriv_text(atom: Deriv, names) -> str:
    out = atom.func
    for name, k in reversed(list(zip(names, atom.orders))):
        for _ in range(k):
            out = f"d{name}({out})"
    return out


def _mono_text(m: Monomial, c: Fraction, names) -> str:
    factors = [_pow_text(p, e) for p, e in m.params]
    if m.h_power:
        factors.append(_pow_text("h", m.h_power))
    for atom, e in m.factors:
        if isinstance(atom, Deriv):
            factors.append(_pow_text(deriv_text(atom, names), e))
        else:
            factors.append(_pow_text(atom.text(), e))
    if c != 1 or not factors:
        factors.insert(0, _num_text(c))
    return "*".join(factors)


def expr_text(e: PolyExpr, variables=None) -> str:
    names = _var_names(e, variables)
    return _join(_signed_terms(e, lambda m, c: _mono_text(m, c, names)))


def decomposition_text(dec, variables=None) -> str:
    names = variables
    if names is None:
        from .sexp import _dim_of_dec

        names = default_variable_names(_dim_of_dec(dec) or 0)
    names = [getattr(v, "name", v) for v in names]
    chunks = [
        (False, f"d{var.name}({decomposition_text(inner, names)})")
        for var, inner in dec.parts
    ]
    chunks += list(
        _signed_terms(dec.remainder, lambda m, c: _mono_text(m, c, names))
    )
    return _join(chunks)


# LaTeX --------------------------------------------------------------------------


def symbol_latex(name: str) -> str:
    m = re.fullmatch(r"([A-Za-z]+?)_?(\d*)", name)
    if m and m.group(1) in _GREEK:
        base = "\\" + m.group(1)
    elif m and len(m.group(1)) == 1:
        base = m.group(1)
    else:
        return r"\mathrm{" + name.replace("_", r"\_") + "}"
    return base + (f"_{{{m.group(2)}}}" if m.group(2) else "")


def _num_latex(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return rf"\frac{{{c.numerator}}}{{{c.denominator}}}"


def deriv_latex(atom: Deriv, names) -> str:
    ops = []
    for name, k in zip(names, atom.orders):
        if k == 1:
            ops.append(rf"\partial_{name}")
        elif k > 1:
            ops.append(rf"\partial_{name}^{{{k}}}")
    return " ".join(ops + [symbol_latex(atom.func)])


def _mono_latex(m: Monomial, c: Fraction, names) -> str:
    def power(base, e, wrap=False):
        if e == 1:
            return base
        if wrap:
            base = rf"\left({base}\right)"
        return f"{base}^{{{e}}}"

    factors = [power(symbol_latex(p), e) for p, e in m.params]
    if m.h_power:
        factors.append(power("h", m.h_power))
    for atom, e in m.factors:
        factors.append(power(deriv_latex(atom, names), e, wrap=atom.order > 0))
    if c != 1 or not factors:
        factors.insert(0, _num_latex(c))
    return " ".join(factors)


def expr_latex(e: ContinuumExpr, variables=None) -> str:
    names = _var_names(e, variables)
    return _join(_signed_terms(e, lambda m, c: _mono_latex(m, c, names)))


def decomposition_latex(dec, variables=None) -> str:
    names = variables
    if names is None:
        from .sexp import _dim_of_dec

        names = default_variable_names(_dim_of_dec(dec) or 0)
    names = [getattr(v, "name", v) for v in names]
    chunks = [
        (False, rf"\partial_{var.name}\left({decomposition_latex(inner, names)}\right)")
        for var, inner in dec.parts
    ]
    chunks += list(
        _signed_terms(dec.remainder, lambda m, c: _mono_latex(m, c, names))
    )
    return _join(chunks)


# dispatch ------------------------------------------------------------------------


def render(x, fmt: str = "text", variables=None) -> str:
    """Render an expression, decomposition, PDE system or derivation report."""
    from .conserve import Decomposition
    from .pipeline import DerivationReport, PdeSystem

    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if isinstance(x, DerivationReport):
        if fmt == "json":
            return json.dumps(x.to_json(), indent=2, sort_keys=True) + "\n"
        return render(x.system, fmt)
    if isinstance(x, PdeSystem):
        variables = x.meta.var_order
        if fmt == "sexp":
            return dump_system(((e.species, e.rhs) for e in x.entries), variables)
        if fmt == "json":
            return json.dumps(x.to_json(), indent=2, sort_keys=True) + "\n"
        if fmt == "latex":
            lines = [
                rf"\partial_t {symbol_latex(e.species)} &= {decomposition_latex(e.rhs, variables)}"
                for e in x.entries
            ]
            return " \\\\\n".join(lines)
        return "\n".join(
            f"dt({e.species}) = {decomposition_text(e.rhs, variables)}" for e in x.entries
        )
    if isinstance(x, Decomposition):
        if fmt == "sexp":
            return dump_decomposition(x, variables)
        if fmt == "latex":
            return decomposition_latex(x, variables)
        if fmt == "json":
            return json.dumps({"kind": "decomposition", "sexp": dump_decomposition(x, variables)})
        return decomposition_text(x, variables)
    if isinstance(x, ContinuumExpr):
        if fmt == "sexp":
            return dump_expr(x, variables)
        if fmt == "latex":
            return expr_latex(x, variables)
        if fmt == "json":
            return json.dumps(
                {"kind": "expression", "monomials": len(x), "sexp": dump_expr(x, variables)}
            )
        return expr_text(x, variables)
    raise TypeError(f"cannot render {type(x).__name__}")
