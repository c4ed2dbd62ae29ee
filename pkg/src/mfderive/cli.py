"""Command-line driver.

Exit codes: 0 success, 1 usage or parse error, 2 scaling obstruction,
3 golden mismatch. Errors are reported on one line of stderr as
``mfderive: error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .conserve import IntegrationOrder, flatten, partial_integrate
from .errors import MfderiveError, ScalingObstruction
from .lattice import build_master_rhs
from .pipeline import derive, load_model, matches_golden
from .render import FORMATS, render
from .sexp import parse_any, parse_expr
from .symexpr import variables as make_vars
from .taylor import ExpansionOptions, expand_lattice

EXIT_OK, EXIT_USAGE, EXIT_SCALING, EXIT_MISMATCH = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _csv(text: str) -> list[str]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _add_pipeline_opts(p):
    p.add_argument("--model", required=True, type=Path, help="model JSON file")
    p.add_argument("--order", type=_positive, default=2, help="Taylor order K (default 2)")
    p.add_argument("--scaling", type=int, choices=(1, 2), default=1, help="dt = h^s (default 1)")
    p.add_argument("--keep", type=int, default=2, help="powers of h kept after the limit (default 2)")
    p.add_argument("--depth", type=_positive, default=2, help="nesting depth (default 2)")
    p.add_argument("--func-order", type=_csv, help="function order, e.g. r,b")
    p.add_argument("--var-order", type=_csv, help="variable order, e.g. x,y")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mfderive", description="Derive mean-field PDEs from lattice models.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage timings")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("derive", help="derive the PDE system of a model")
    _add_pipeline_opts(p)
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--out", type=Path, help="write to FILE instead of stdout")

    p = sub.add_parser("integrate", help="decompose one s-expression")
    p.add_argument("--expr", required=True, help="expression as (sum ...)")
    p.add_argument("--funcs", required=True, type=_csv)
    p.add_argument("--vars", required=True, type=_csv)
    p.add_argument("--depth", type=_positive, default=1)
    p.add_argument("--format", choices=FORMATS, default="text")

    p = sub.add_parser("expand", help="Taylor-expand the master equation of one species")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--species", required=True)
    p.add_argument("--order", type=_positive, default=2)
    p.add_argument("--format", choices=FORMATS, default="text")

    p = sub.add_parser("check", help="compare a derivation with a golden file")
    _add_pipeline_opts(p)
    p.add_argument("--against", required=True, type=Path, help="golden .sexp file")
    return parser


def _options(args):
    opts = ExpansionOptions(order=args.order, scaling=args.scaling, keep=args.keep)
    return opts


def _derive(args):
    model = load_model(args.model)
    funcs = args.func_order or list(model.species)
    vars_ = args.var_order or list(model.variables)
    order = IntegrationOrder(tuple(funcs), tuple(make_vars(vars_)), args.depth)
    return model, derive(model, _options(args), order)


def _emit(text: str, out: Path | None):
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _run(args) -> int:
    if args.command == "derive":
        _, report = _derive(args)
        target = report if args.format == "json" else report.system
        _emit(render(target, args.format), args.out)
        return EXIT_OK

    if args.command == "integrate":
        expr = parse_expr(args.expr, args.vars)
        dec = partial_integrate(expr, IntegrationOrder(tuple(args.funcs), make_vars(args.vars), args.depth))
        _emit(render(dec, args.format, args.vars), None)
        return EXIT_OK

    if args.command == "expand":
        model = load_model(args.model)
        expanded = expand_lattice(build_master_rhs(model, args.species), args.order)
        _emit(render(expanded, args.format, model.variables), None)
        return EXIT_OK

    if args.command == "check":
        model, report = _derive(args)
        golden = parse_any(args.against.read_text(encoding="utf-8"), list(model.variables))
        if not isinstance(golden, dict):
            if len(model.species) != 1:
                raise _UsageError("golden file must be a (system ...) for multi-species models")
            from .conserve import Decomposition

            if not isinstance(golden, Decomposition):
                golden = Decomposition(golden)
            golden = {model.species[0]: golden}
        verdict = matches_golden(report.system, golden)
        for species, ok in verdict.items():
            print(f"{species}: {'match' if ok else 'MISMATCH'}")
        if all(verdict.values()):
            return EXIT_OK
        bad = ",".join(s for s, ok in verdict.items() if not ok)
        print(f"mfderive: error: mismatch: species {bad} differ from golden", file=sys.stderr)
        return EXIT_MISMATCH
    raise _UsageError(f"unknown command {args.command!r}")


def _fail(category: str, message: str) -> None:
    line = " ".join(str(message).split())
    print(f"mfderive: error: {category}: {line}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _fail("usage", exc)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        return _run(args)
    except ScalingObstruction as exc:
        _fail(exc.category, exc)
        return EXIT_SCALING
    except MfderiveError as exc:
        _fail(exc.category, exc)
        return EXIT_USAGE
    except _UsageError as exc:
        _fail("usage", exc)
        return EXIT_USAGE
    except (OSError, UnicodeDecodeError) as exc:
        _fail("io", exc)
        return EXIT_USAGE
    except ValueError as exc:
        _fail("value", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
