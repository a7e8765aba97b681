"""Model and instrument spec files.

Both are JSON documents validated against the schemas shipped under
``polydiff/schemas``; parse failures raise SpecError with the offending
field path (or line/column for malformed JSON) so the CLI can report
actionable diagnostics and exit with the input-error code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .generator import ModelCoefficients
from .polynomial import Polynomial
from .statespace import (
    BoxOrthant,
    BoxOrthantParams,
    FullSpace,
    Quadric,
    QuadricParams,
    Simplex,
    SimplexParams,
    StateSpace,
    assemble_model,
)

__all__ = ["SpecError", "PricingBlock", "ModelSpec", "load_model_spec",
           "load_instrument", "load_schema", "parse_model_spec", "parse_instrument"]


class SpecError(ValueError):
    """A spec file failed to parse or validate."""


def load_schema(name: str) -> dict:
    """Read one of the shipped JSON schemas by file name."""
    text = resources.files("polydiff").joinpath("schemas", name).read_text()
    return json.loads(text)


def _validate_against(instance: dict, schema_name: str, defs_key: str | None = None):
    schema = load_schema(schema_name)
    if defs_key is not None:
        schema = {"$defs": schema["$defs"], **schema["$defs"][defs_key]}
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        raise SpecError(f"{exc.json_path}: {exc.message}") from exc


@dataclass(frozen=True)
class PricingBlock:
    p: Polynomial
    alpha_rate: float
    degree: int


@dataclass(frozen=True)
class ModelSpec:
    """A parsed model file: state space, coefficients, optional pricing block.

    ``params`` is None when the coefficients were given as raw polynomials.
    """

    statespace: StateSpace
    model: ModelCoefficients
    params: object | None
    pricing: PricingBlock | None
    raw: dict


_FAMILY_PARAM_FIELDS = {
    "quadric": {"alpha", "beta", "B", "gamma"},
    "box_orthant": {"gamma", "alpha", "phi", "psi", "pi", "beta", "B"},
    "simplex": {"alpha", "beta", "B"},
}


def _build_statespace(doc: dict) -> StateSpace:
    ss = doc["state_space"]
    family = ss["family"]
    dim = doc["dimension"]
    extra = set(ss) - {"family"}
    if family == "full":
        if extra:
            raise SpecError(f"state_space: unexpected fields {sorted(extra)} for family 'full'")
        return FullSpace(dim)
    if family == "quadric":
        if extra - {"Q", "orientation"}:
            raise SpecError(f"state_space: unexpected fields {sorted(extra - {'Q', 'orientation'})} for family 'quadric'")
        if "Q" not in ss:
            raise SpecError("state_space.Q: required for family 'quadric'")
        space = Quadric(ss["Q"], orientation=ss.get("orientation", "inside"))
        if space.dim != dim:
            raise SpecError(f"state_space.Q: {space.dim}x{space.dim} matrix does not match dimension {dim}")
        return space
    if family == "box_orthant":
        if extra - {"m", "n"}:
            raise SpecError(f"state_space: unexpected fields {sorted(extra - {'m', 'n'})} for family 'box_orthant'")
        if "m" not in ss or "n" not in ss:
            raise SpecError("state_space: family 'box_orthant' requires fields m and n")
        if ss["m"] + ss["n"] != dim:
            raise SpecError(f"state_space: m + n = {ss['m'] + ss['n']} does not match dimension {dim}")
        return BoxOrthant(ss["m"], ss["n"])
    if extra:
        raise SpecError(f"state_space: unexpected fields {sorted(extra)} for family 'simplex'")
    return Simplex(dim)


def _build_params(space: StateSpace, doc: dict):
    family = space.family
    if family not in _FAMILY_PARAM_FIELDS:
        raise SpecError(f"coefficients: family '{family}' has no parameter form; use kind 'raw'")
    given = doc["coefficients"]["params"]
    allowed = _FAMILY_PARAM_FIELDS[family]
    unknown = set(given) - allowed
    if unknown:
        raise SpecError(f"coefficients.params: unknown fields {sorted(unknown)} for family '{family}'")
    try:
        if family == "quadric":
            return QuadricParams(alpha=given["alpha"], beta=given["beta"],
                                 B=given["B"], gamma=given.get("gamma"))
        if family == "box_orthant":
            return BoxOrthantParams(m=space.m, n=space.n, gamma=given["gamma"],
                                    alpha=given["alpha"], phi=given["phi"], psi=given["psi"],
                                    pi=given["pi"], beta=given["beta"], B=given["B"])
        return SimplexParams(alpha=given["alpha"], beta=given["beta"], B=given["B"])
    except KeyError as exc:
        raise SpecError(f"coefficients.params: missing field {exc} for family '{family}'") from exc
    except (ValueError, TypeError) as exc:
        raise SpecError(f"coefficients.params: {exc}") from exc


def _build_raw(space: StateSpace, doc: dict) -> ModelCoefficients:
    co = doc["coefficients"]
    d = space.dim
    try:
        a = [[Polynomial.from_json_dict(entry) for entry in row] for row in co["a"]]
        b = [Polynomial.from_json_dict(entry) for entry in co["b"]]
    except ValueError as exc:
        raise SpecError(f"coefficients: {exc}") from exc
    if len(a) != d or any(len(row) != d for row in a):
        raise SpecError(f"coefficients.a: expected a {d}x{d} array of polynomials")
    if len(b) != d:
        raise SpecError(f"coefficients.b: expected {d} polynomials")
    try:
        return ModelCoefficients(a, b)
    except ValueError as exc:
        raise SpecError(f"coefficients: {exc}") from exc


def parse_model_spec(doc: dict) -> ModelSpec:
    _validate_against(doc, "modelspec.schema.json")
    space = _build_statespace(doc)
    if doc["coefficients"]["kind"] == "family":
        params = _build_params(space, doc)
        try:
            model = assemble_model(space, params)
        except ValueError as exc:
            raise SpecError(f"coefficients.params: {exc}") from exc
    else:
        params = None
        model = _build_raw(space, doc)
    pricing = None
    if "pricing" in doc:
        blk = doc["pricing"]
        try:
            p = Polynomial.from_json_dict(blk["p"])
        except ValueError as exc:
            raise SpecError(f"pricing.p: {exc}") from exc
        if p.dim != space.dim:
            raise SpecError(f"pricing.p: polynomial dimension {p.dim} does not match model dimension {space.dim}")
        pricing = PricingBlock(p=p, alpha_rate=float(blk["alpha_rate"]), degree=int(blk["degree"]))
    return ModelSpec(statespace=space, model=model, params=params, pricing=pricing, raw=doc)


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_model_spec(path: str) -> ModelSpec:
    return parse_model_spec(_read_json(path))


def parse_instrument(doc: dict) -> dict:
    _validate_against(doc, "instrument.schema.json")
    return doc


def load_instrument(path: str) -> dict:
    return parse_instrument(_read_json(path))
