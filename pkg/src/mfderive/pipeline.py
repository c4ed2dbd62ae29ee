"""Model loading and the full derivation pipeline.

For each species: master equation -> Taylor expansion -> scaling limit ->
conservative-form decomposition.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import jsonschema

from .conserve import Decomposition, IntegrationOrder, flatten, partial_integrate
from .errors import ModelError, ScalingObstruction
from .lattice import Model, build_master_rhs, model_from_dict
from .sexp import dump_decomposition, dump_expr
from .symexpr import ContinuumExpr
from .taylor import ExpansionOptions, expand_lattice, take_limit, vanishing_orders

log = logging.getLogger(__name__)

_IDENT = r"^[A-Za-z_][A-Za-z0-9_]*$"

MODEL_SCHEMA = {
    "type": "object",
    "required": ["dimension", "species", "transitions"],
    "additionalProperties": False,
    "properties": {
        "dimension": {"type": "integer", "minimum": 1},
        "variables": {"type": "array", "items": {"type": "string", "pattern": _IDENT}, "uniqueItems": True},
        "species": {
            "type": "array", "minItems": 1, "uniqueItems": True,
            "items": {"type": "string", "pattern": _IDENT},
        },
        "parameters": {"type": "array", "items": {"type": "string", "pattern": _IDENT}, "uniqueItems": True},
        "aliases": {
            "type": "object",
            "propertyNames": {"pattern": _IDENT},
            "additionalProperties": {"type": "string"},
        },
        "spacing": {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}}]},
        "description": {"type": "string"},
        "transitions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["species", "jump", "rate"],
                "additionalProperties": False,
                "properties": {
                    "species": {"type": "string"},
                    "jump": {"type": "array", "minItems": 1, "items": {"type": "integer"}},
                    "rate": {"type": "string"},
                },
            },
        },
    },
}


def bundled_model_path(name: str) -> Path:
    """Path of a bundled fixture: ``pedestrian`` or ``adhesion``."""
    return Path(str(resources.files("mfderive") / "data" / f"{name}.json"))


def bundled_golden_path(name: str) -> Path:
    return Path(str(resources.files("mfderive") / "data" / f"{name}.sexp"))


def model_from_json(text: str, fingerprint: str | None = None) -> Model:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    validator = jsonschema.Draft202012Validator(MODEL_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ModelError(err.message, err.json_path)
    if fingerprint is None:
        fingerprint = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return model_from_dict(data, fingerprint)


def load_model(path) -> Model:
    """Read, validate and build a model from a UTF-8 JSON file."""
    raw = Path(path).read_bytes()
    return model_from_json(raw.decode("utf-8"), hashlib.sha256(raw).hexdigest())


def model_fingerprint(m: Model) -> str:
    if m.fingerprint:
        return m.fingerprint
    canon = json.dumps(m.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SystemMeta:
    order: int
    scaling: int
    keep: int
    depth: int
    func_order: tuple[str, ...]
    var_order: tuple[str, ...]
    model_fingerprint: str

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "scaling": self.scaling,
            "keep": self.keep,
            "depth": self.depth,
            "funcOrder": list(self.func_order),
            "varOrder": list(self.var_order),
            "modelFingerprint": self.model_fingerprint,
        }


@dataclass(frozen=True)
class SpeciesEquation:
    species: str
    rhs: Decomposition


@dataclass(frozen=True)
class PdeSystem:
    """d_t c = flatten(rhs) for every species, in declaration order."""

    entries: tuple[SpeciesEquation, ...]
    meta: SystemMeta

    def rhs(self, species: str) -> Decomposition:
        for e in self.entries:
            if e.species == species:
                return e.rhs
        raise KeyError(species)

    def to_json(self) -> dict:
        vs = self.meta.var_order
        return {
            "meta": self.meta.to_json(),
            "equations": [
                {
                    "species": e.species,
                    "rhs": dump_decomposition(e.rhs, vs),
                    "flat": dump_expr(flatten(e.rhs), vs),
                }
                for e in self.entries
            ],
        }


@dataclass
class SpeciesDiagnostics:
    master_terms: int
    expanded_terms: int
    limit_terms: int
    remainder_terms: int
    vanished_orders: list[int]
    limit: ContinuumExpr = field(repr=False, default=None)
    expanded: ContinuumExpr = field(repr=False, default=None)
    seconds: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "monomials": {
                "master": self.master_terms,
                "expanded": self.expanded_terms,
                "limit": self.limit_terms,
                "remainder": self.remainder_terms,
            },
            "vanishedOrders": self.vanished_orders,
        }


@dataclass
class DerivationReport:
    system: PdeSystem
    diagnostics: dict[str, SpeciesDiagnostics]

    def to_json(self) -> dict:
        # timings are left out so the JSON stays byte-identical across runs
        out = self.system.to_json()
        out["diagnostics"] = {s: d.to_json() for s, d in self.diagnostics.items()}
        return out


def derive_species(m: Model, s: str, opts: ExpansionOptions):
    """Master RHS, expansion and limit for one species; returns (limit, diagnostics)."""
    clock = time.perf_counter
    t0 = clock()
    master = build_master_rhs(m, s)
    t1 = clock()
    expanded = expand_lattice(master, opts.order)
    t2 = clock()
    try:
        vanished = vanishing_orders(expanded, opts.scaling)
        limit = take_limit(expanded, opts)
    except ScalingObstruction as exc:
        exc.species = s
        exc.args = (f"species {s}: {exc.args[0]}",)
        raise
    t3 = clock()
    diag = SpeciesDiagnostics(
        master_terms=len(master),
        expanded_terms=len(expanded),
        limit_terms=len(limit),
        remainder_terms=0,
        vanished_orders=vanished,
        limit=limit,
        expanded=expanded,
        seconds={"master": t1 - t0, "expand": t2 - t1, "limit": t3 - t2},
    )
    return limit, diag


def _remainder_size(dec: Decomposition) -> int:
    return len(dec.remainder) + sum(_remainder_size(inner) for _, inner in dec.parts)


def derive(
    m: Model,
    opts: ExpansionOptions | None = None,
    order: IntegrationOrder | None = None,
) -> DerivationReport:
    """Run the full pipeline for every species of ``m``."""
    opts = opts or ExpansionOptions()
    order = order or IntegrationOrder(m.species, m.variables, 2)
    missing = set(m.species) - set(order.funcs)
    if missing:
        raise ModelError(f"function order lacks species {', '.join(sorted(missing))}", "$.species")
    for v in order.vars:
        if v.name not in m.variables:
            raise ModelError(f"unknown variable {v.name!r} in variable order", "$.variables")
    # variable indices refer to the model's coordinate order, not to the integration order
    vars_ = tuple(v._replace(index=m.variables.index(v.name)) for v in order.vars)
    order = IntegrationOrder(order.funcs, vars_, order.depth)

    entries = []
    diagnostics = {}
    for s in m.species:
        limit, diag = derive_species(m, s, opts)
        t0 = time.perf_counter()
        dec = partial_integrate(limit, order)
        diag.seconds["integrate"] = time.perf_counter() - t0
        diag.remainder_terms = _remainder_size(dec)
        log.debug("species %s: %s", s, diag.seconds)
        entries.append(SpeciesEquation(s, dec))
        diagnostics[s] = diag

    meta = SystemMeta(
        order=opts.order,
        scaling=opts.scaling,
        keep=opts.keep,
        depth=order.depth,
        func_order=order.funcs,
        var_order=tuple(m.variables),
        model_fingerprint=model_fingerprint(m),
    )
    return DerivationReport(PdeSystem(tuple(entries), meta), diagnostics)


def matches_golden(system: PdeSystem, golden: dict) -> dict[str, bool]:
    """Per-species flatten-equality against a golden species -> Decomposition map."""
    out = {}
    for e in system.entries:
        if e.species not in golden:
            out[e.species] = False
            continue
        out[e.species] = (flatten(e.rhs) - flatten(golden[e.species])).is_zero()
    for s in golden:
        out.setdefault(s, False)
    return out
