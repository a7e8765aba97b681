"""Command-line front end.

Exit codes are a stable contract: 0 success (or Valid verdict), 1 for
domain-negative outcomes (Invalid/Inconclusive verdicts, points outside the
state space, degree overruns, bad state-price densities), 2 for unreadable
or malformed input.  All numeric JSON output is emitted at 17 significant
digits so values round-trip exactly.
"""

from __future__ import annotations

import gzip
import json
import sys
import warnings

import click
import numpy as np

from .basis import DegreeTooHigh, monomial_basis
from .conditions import (
    check_necessary,
    check_sufficient,
    classify_boundary,
    uniqueness_report,
    validate_params,
)
from .generator import (
    NotPolynomialOnE,
    PointOutsideStateSpace,
    conditional_moment,
    generator_matrix,
    moment_by_ode,
)
from .polynomial import DivisionFailure, Polynomial
from .pricing import (
    InvalidStatePriceDensity,
    LognormalIndexPricer,
    PricingModel,
    SimplexIndexModel,
    TabulatedIndexPricer,
    bond_price,
    fit_index_payoff,
    swaption_price_mc,
    variance_swap_rate,
)
from .simulate import boundary_hit_stats, mc_moment, simulate_paths
from .specfile import SpecError, load_instrument, load_model_spec

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2

_DOMAIN_ERRORS = (PointOutsideStateSpace, DegreeTooHigh, NotPolynomialOnE,
                  DivisionFailure, InvalidStatePriceDensity, OverflowError)


def _format_json(obj, indent=0) -> str:
    """JSON with floats at 17 significant digits (round-trip exact)."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(f'{pad}  {json.dumps(k)}: {_format_json(v, indent + 1)}'
                           for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}  {_format_json(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    return json.dumps(obj)


def _emit(ctx, text: str):
    out = ctx.obj.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text)


def _parse_point(text: str, dim: int) -> np.ndarray:
    try:
        x = np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise SpecError(f"--x: expected comma-separated floats, got {text!r}")
    if x.shape != (dim,):
        raise SpecError(f"--x: expected {dim} coordinates, got {len(x)}")
    return x


def _parse_poly(text: str, dim: int) -> Polynomial:
    if text.startswith("@"):
        try:
            with open(text[1:]) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"--poly: {exc}")
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"--poly: {exc.msg} at column {exc.colno}")
    try:
        p = Polynomial.from_json_dict(doc)
    except ValueError as exc:
        raise SpecError(f"--poly: {exc}")
    if p.dim != dim:
        raise SpecError(f"--poly: polynomial dimension {p.dim} does not match model dimension {dim}")
    return p


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Write the primary output to this file instead of stdout.")
@click.option("--samples", type=int, default=1000, show_default=True,
              help="Sample budget for sampled checks.")
@click.option("--seed", type=int, default=0, show_default=True, help="RNG seed for simulation.")
@click.option("--verify", is_flag=True, help="Cross-check closed forms against numerical oracles.")
@click.option("--quiet", is_flag=True, help="Suppress warnings and informational messages.")
@click.pass_context
def main(ctx, out, samples, seed, verify, quiet):
    """Polynomial diffusion models: validation, moments, simulation, pricing."""
    ctx.ensure_object(dict)
    ctx.obj.update(out=out, samples=samples, seed=seed, verify=verify, quiet=quiet)
    if quiet:
        warnings.simplefilter("ignore")


@main.command()
@click.argument("spec_path", type=click.Path(exists=False))
@click.pass_context
def validate(ctx, spec_path):
    """Check model parameters, invariance conditions, and uniqueness."""
    samples = ctx.obj["samples"]
    try:
        spec = load_model_spec(spec_path)
    except SpecError as exc:
        _fail(str(exc), EXIT_INPUT)
    try:
        if spec.params is not None:
            pr = validate_params(spec.statespace, spec.params, samples=samples)
            param_block = {"verdict": pr.verdict,
                           "conditions": [c.as_json_dict() for c in pr.conditions]}
            verdict = pr.verdict
        else:
            param_block = None
        nec = check_necessary(spec.model, spec.statespace, samples=samples)
        suf = check_sufficient(spec.model, spec.statespace, samples=samples)
        if spec.params is None:
            verdict = {"pass": "Valid", "fail": "Invalid"}.get(suf.verdict, "Inconclusive")
        uniq = uniqueness_report(spec.model, spec.statespace)
    except _DOMAIN_ERRORS as exc:
        _fail(str(exc), EXIT_DOMAIN)
    report = {
        "family": spec.statespace.family,
        "verdict": verdict,
        "parameter_conditions": param_block,
        "necessary": {"verdict": nec.verdict,
                      "conditions": [c.as_json_dict() for c in nec.conditions]},
        "sufficient": {"verdict": suf.verdict,
                       "conditions": [c.as_json_dict() for c in suf.conditions]},
        "uniqueness": uniq.as_json_dict(),
    }
    _emit(ctx, _format_json(report))
    sys.exit(EXIT_OK if verdict == "Valid" else EXIT_DOMAIN)


@main.command()
@click.argument("spec_path", type=click.Path(exists=False))
@click.option("--degree", type=int, required=True, help="Basis degree bound.")
@click.option("--x", "x_text", required=True, help="Conditioning point, comma-separated.")
@click.option("--tau", type=float, required=True, help="Time horizon (>= 0).")
@click.option("--poly", "poly_text", required=True,
              help="Moment polynomial as JSON, or @file.json.")
@click.option("--mc-paths", type=int, default=0,
              help="With --verify, also Monte Carlo cross-check using this many paths.")
@click.option("--dt", type=float, default=1e-3, show_default=True,
              help="Step size for the Monte Carlo cross-check.")
@click.pass_context
def moments(ctx, spec_path, degree, x_text, tau, poly_text, mc_paths, dt):
    """Closed-form conditional moment E[p(X_tau) | X_0 = x]."""
    try:
        spec = load_model_spec(spec_path)
        x = _parse_point(x_text, spec.statespace.dim)
        p = _parse_poly(poly_text, spec.statespace.dim)
    except SpecError as exc:
        _fail(str(exc), EXIT_INPUT)
    try:
        value = conditional_moment(spec.model, spec.statespace, degree, p, x, tau)
        report = {"value": value, "degree": degree, "tau": tau,
                  "x": list(x), "polynomial": p.to_json_dict()}
        if ctx.obj["verify"]:
            ode = moment_by_ode(spec.model, spec.statespace, degree, p, x, tau)
            report["verify"] = {"ode_value": ode, "abs_diff": abs(value - ode)}
            if mc_paths > 0:
                paths = simulate_paths(spec.model, spec.statespace, x, max(tau, dt), dt,
                                       mc_paths, ctx.obj["seed"],
                                       store_stride=max(int(round(max(tau, dt) / dt)), 1))
                est, se = mc_moment(paths, p, tau)
                report["verify"].update(mc_value=est, mc_standard_error=se, mc_paths=mc_paths)
    except _DOMAIN_ERRORS as exc:
        _fail(str(exc), EXIT_DOMAIN)
    _emit(ctx, _format_json(report))


@main.command()
@click.argument("spec_path", type=click.Path(exists=False))
@click.option("--x0", "x0_text", required=True, help="Starting point, comma-separated.")
@click.option("--paths", type=int, default=1000, show_default=True)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--t-end", "--T", "t_end", type=float, required=True, help="Horizon T.")
@click.option("--store-stride", type=int, default=1, show_default=True,
              help="Keep every k-th step (the endpoint is always kept).")
@click.option("--threshold", type=float, default=1e-6, show_default=True,
              help="Boundary-hit threshold for the summary statistics.")
@click.option("--gzip", "use_gzip", is_flag=True, help="Write the path CSV gzip-compressed.")
@click.pass_context
def simulate(ctx, spec_path, x0_text, paths, dt, t_end, store_stride, threshold, use_gzip):
    """Simulate paths; write CSV to --out and a JSON summary to stdout."""
    out = ctx.obj.get("out")
    if not out:
        _fail("simulate requires --out for the path CSV", EXIT_INPUT)
    try:
        spec = load_model_spec(spec_path)
        x0 = _parse_point(x0_text, spec.statespace.dim)
    except SpecError as exc:
        _fail(str(exc), EXIT_INPUT)
    try:
        ps = simulate_paths(spec.model, spec.statespace, x0, t_end, dt, paths,
                            ctx.obj["seed"], store_stride=store_stride)
    except _DOMAIN_ERRORS as exc:
        _fail(str(exc), EXIT_DOMAIN)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc), EXIT_DOMAIN)
    if use_gzip:
        # fixed mtime keeps the compressed bytes reproducible across runs
        with open(out, "wb") as fh:
            fh.write(gzip.compress(ps.csv_text().encode(), mtime=0))
    else:
        with open(out, "w") as fh:
            fh.write(ps.csv_text())
    stats = []
    for k, p in enumerate(spec.statespace.inequalities):
        st = boundary_hit_stats(ps, spec.statespace, p, threshold)
        stats.append({"inequality": k, **st})
    summary = {"n_paths": paths, "n_steps": ps.n_steps, "dt": dt,
               "seed": ctx.obj["seed"], "csv_path": out, "boundary_stats": stats}
    click.echo(_format_json(summary))


@main.command()
@click.argument("spec_path", type=click.Path(exists=False))
@click.option("--margin", type=float, default=1e-9, show_default=True,
              help="Strictness margin for sampled sign checks.")
@click.pass_context
def boundary(ctx, spec_path, margin):
    """Classify boundary attainment for every inequality of the state space."""
    samples = ctx.obj["samples"]
    try:
        spec = load_model_spec(spec_path)
    except SpecError as exc:
        _fail(str(exc), EXIT_INPUT)
    entries = []
    try:
        for k, p in enumerate(spec.statespace.inequalities):
            bv = classify_boundary(spec.model, spec.statespace, p,
                                   samples=samples, margin=margin)
            entry = {"index": k, "verdict": bv.verdict, "stratum": bv.stratum,
                     "detail": bv.detail, "witness": bv.witness,
                     "h": [c.to_json_dict() for c in bv.h] if bv.h is not None else None}
            entries.append(entry)
    except _DOMAIN_ERRORS as exc:
        _fail(str(exc), EXIT_DOMAIN)
    _emit(ctx, _format_json({"inequalities": entries}))


def _build_index_pricer(doc: dict):
    if doc["type"] == "lognormal":
        return LognormalIndexPricer(spot=doc["spot"], rate=doc["rate"], vol=doc["vol"])
    return TabulatedIndexPricer(doc["strikes"], doc["prices"])


@main.command()
@click.argument("spec_path", type=click.Path(exists=False))
@click.argument("instrument_path", type=click.Path(exists=False))
@click.pass_context
def price(ctx, spec_path, instrument_path):
    """Price an instrument file against a model with a pricing block."""
    try:
        spec = load_model_spec(spec_path)
        instr = load_instrument(instrument_path)
        if spec.pricing is None:
            raise SpecError("model spec has no pricing block")
        x = np.asarray(instr["x"], dtype=float)
        if x.shape != (spec.statespace.dim,):
            raise SpecError(f"instrument.x: expected {spec.statespace.dim} coordinates, got {len(x)}")
    except SpecError as exc:
        _fail(str(exc), EXIT_INPUT)
    kind = instr["kind"]
    try:
        if kind == "equity_option":
            if spec.statespace.family != "simplex" or spec.params is None:
                _fail("equity_option requires a simplex model with family parameters", EXIT_INPUT)
            sim = SimplexIndexModel(params=spec.params, T_star=instr["horizon"],
                                    degree=spec.pricing.degree,
                                    pricer=_build_index_pricer(instr["pricer"]))
            pricer = sim.pricer
            payoff, residual = fit_index_payoff(
                sim, pricer, instr["constituent"], instr["T"], instr["K"],
                grid_size=instr.get("grid_size", 256),
                cheb_degree=instr.get("cheb_degree"))
            if not sim.statespace.contains(x):
                raise PointOutsideStateSpace(
                    f"point {x.tolist()} violates constraints beyond tolerance")
            vec = sim.basis.coordinates(payoff)
            value = float(sim.basis.evaluate(x) @ sim.gm.propagator(instr["T"]) @ vec)
            report = {"kind": kind, "price": value,
                      "diagnostics": {"fit_residual": residual,
                                      "cheb_degree": instr.get("cheb_degree") or min(spec.pricing.degree, 10)}}
        else:
            pm = PricingModel(spec.model, spec.statespace, degree=spec.pricing.degree,
                              p=spec.pricing.p, alpha=spec.pricing.alpha_rate)
            denom = float(pm.basis.evaluate(x) @ pm.pvec)
            diagnostics = {"denominator": denom, "positivity": pm.positivity}
            if kind == "bond":
                value = bond_price(pm, x, instr["t"], instr["T"])
                report = {"kind": kind, "price": value, "diagnostics": diagnostics}
            elif kind == "vswap":
                value = variance_swap_rate(pm, x, instr["t"], instr["T"])
                report = {"kind": kind, "price": value, "diagnostics": diagnostics}
            else:
                coupons = [(c, Ti) for c, Ti in instr["coupons"]]
                value, se = swaption_price_mc(
                    pm, coupons, instr["expiry"], x,
                    n_paths=instr.get("n_paths", 20000),
                    seed=ctx.obj["seed"], dt=instr.get("dt", 1e-3))
                report = {"kind": kind, "price": value, "standard_error": se,
                          "diagnostics": diagnostics}
    except _DOMAIN_ERRORS as exc:
        _fail(str(exc), EXIT_DOMAIN)
    except ValueError as exc:
        _fail(str(exc), EXIT_DOMAIN)
    _emit(ctx, _format_json(report))


@main.command("basis-dump")
@click.argument("spec_path", type=click.Path(exists=False))
@click.option("--degree", type=int, required=True, help="Basis degree bound.")
@click.option("--generator", "with_generator", is_flag=True,
              help="Dump the generator matrix CSV instead of the monomial list.")
@click.pass_context
def basis_dump(ctx, spec_path, degree, with_generator):
    """Dump the monomial basis (or the generator matrix on it) as CSV."""
    try:
        spec = load_model_spec(spec_path)
    except SpecError as exc:
        _fail(str(exc), EXIT_INPUT)
    try:
        basis = monomial_basis(spec.statespace, degree)
        if with_generator:
            text = generator_matrix(spec.model, basis).csv_text()
        else:
            text = basis.csv_text()
    except _DOMAIN_ERRORS as exc:
        _fail(str(exc), EXIT_DOMAIN)
    _emit(ctx, text.rstrip("\n"))


if __name__ == "__main__":
    main()
