"""Admissibility, boundary attainment, and uniqueness diagnostics.

Exactly checkable conditions (sign patterns, eigenvalues of constant
matrices, linear identities) are decided outright.  Conditions quantified
over infinite sets are sampled on deterministic grids with a margin: a clear
violation yields Invalid with a witness point, values inside the margin band
yield Inconclusive, and a clear pass is reported Valid.  Sampling therefore
never produces a false Valid on the exact subset and never converts
margin-zone noise into a rejection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .generator import ModelCoefficients, apply_generator
from .polynomial import DivisionFailure, Polynomial, divide_exact
from .simulate import dispersion
from .statespace import (
    BoxOrthant,
    BoxOrthantParams,
    FullSpace,
    Quadric,
    QuadricParams,
    Simplex,
    SimplexParams,
    StateSpace,
    skew_symmetric_basis,
)

__all__ = [
    "ConditionResult",
    "ValidationReport",
    "CheckReport",
    "BoundaryVerdict",
    "UniquenessReport",
    "validate_params",
    "check_necessary",
    "check_sufficient",
    "h_factor",
    "classify_boundary",
    "uniqueness_report",
]

DEFAULT_MARGIN = 1e-9
_EXACT_TOL = 1e-12


@dataclass
class ConditionResult:
    """Outcome of a single named admissibility condition."""

    id: str
    status: str  # "pass" | "fail" | "inconclusive"
    detail: str = ""
    witness: list | None = None

    def as_json_dict(self) -> dict:
        out = {"id": self.id, "status": self.status, "detail": self.detail}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _verdict(conditions: list[ConditionResult]) -> str:
    if any(c.status == "fail" for c in conditions):
        return "Invalid"
    if any(c.status == "inconclusive" for c in conditions):
        return "Inconclusive"
    return "Valid"


@dataclass
class ValidationReport:
    """Family-specific parameter validation: verdict plus per-condition detail."""

    family: str
    verdict: str
    conditions: list[ConditionResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.verdict == "Valid"

    def failed_ids(self) -> list[str]:
        return [c.id for c in self.conditions if c.status == "fail"]

    def as_json_dict(self) -> dict:
        return {
            "family": self.family,
            "verdict": self.verdict,
            "conditions": [c.as_json_dict() for c in self.conditions],
        }


def _exact(cond_id: str, ok: bool, detail: str, witness=None) -> ConditionResult:
    return ConditionResult(cond_id, "pass" if ok else "fail", detail, witness)


def _sampled_sign(cond_id: str, values: np.ndarray, points: np.ndarray, want: str,
                  margin: float, detail: str) -> ConditionResult:
    """Judge a sampled inequality.  ``want`` is "neg" (values < 0) or "pos"."""
    v = values if want == "neg" else -values
    worst = int(np.argmax(v))
    if v[worst] > margin:
        return ConditionResult(cond_id, "fail", f"{detail}; violated, value {values[worst]:.6g}",
                               witness=np.asarray(points[worst]).tolist())
    if v[worst] > -margin:
        return ConditionResult(cond_id, "inconclusive",
                               f"{detail}; extreme sampled value {values[worst]:.6g} within margin {margin:g}")
    return ConditionResult(cond_id, "pass", f"{detail}; extreme sampled value {values[worst]:.6g}")


def _eigmin(M: np.ndarray) -> float:
    if M.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _validate_quadric(space: Quadric, params: QuadricParams, samples: int, margin: float) -> ValidationReport:
    conds: list[ConditionResult] = []
    inside = space.orientation == "inside"
    alpha = params.alpha if inside else -params.alpha
    tol = _EXACT_TOL * (1.0 + np.abs(params.alpha).max(initial=0.0))
    e_alpha = _eigmin(alpha)
    conds.append(_exact("quadric.alpha_psd", e_alpha >= -tol,
                        f"{'alpha' if inside else '-alpha'} PSD (min eigenvalue {e_alpha:.6g})"))
    e_gamma = _eigmin(params.gamma)
    tol_g = _EXACT_TOL * (1.0 + np.abs(params.gamma).max(initial=0.0))
    conds.append(_exact("quadric.gamma_psd", e_gamma >= -tol_g,
                        f"gamma PSD (min eigenvalue {e_gamma:.6g})"))

    X = space.boundary_samples(0, samples)
    Qd = np.diag(space.Q)
    lin = X @ (space.Q @ params.beta)
    quad = np.einsum("ki,ij,kj->k", X, params.B.T @ space.Q, X)
    corr = np.zeros(len(X))
    S = skew_symmetric_basis(space.dim)
    for k in range(len(S)):
        for l in range(len(S)):
            if params.gamma[k, l] != 0.0:
                Wk = X @ S[k].T
                Wl = X @ S[l].T
                corr += 0.5 * params.gamma[k, l] * np.einsum("ki,i,ki->k", Wl, Qd, Wk)
    vals = lin + quad + corr
    want = "neg" if inside else "pos"
    sense = "< 0" if inside else "> 0"
    conds.append(_sampled_sign("quadric.boundary_drift", vals, X, want, margin,
                               f"boundary drift form {sense} on the quadric"))
    return ValidationReport("quadric", _verdict(conds), conds)


def _validate_box_orthant(space: BoxOrthant, params: BoxOrthantParams, samples: int, margin: float) -> ValidationReport:
    conds: list[ConditionResult] = []
    m, n = space.m, space.n
    B = params.B

    if m:
        bad = np.flatnonzero(params.gamma < 0.0)
        conds.append(_exact("box.gamma_nonneg", bad.size == 0,
                            "box diffusion factors gamma_i >= 0" if bad.size == 0
                            else f"gamma[{bad[0]}] = {params.gamma[bad[0]]:.6g} < 0"))
        lower = np.array([np.maximum(-np.delete(B[i, :m], i), 0.0).sum() for i in range(m)])
        upper = np.array([-B[i, i] - np.maximum(np.delete(B[i, :m], i), 0.0).sum() for i in range(m)])
        beta_box = params.beta[:m]
        ok = np.all((lower < beta_box) & (beta_box < upper))
        i_bad = next((i for i in range(m) if not (lower[i] < beta_box[i] < upper[i])), None)
        conds.append(_exact("box.drift_box", bool(ok),
                            "inward drift on both box faces"
                            if ok else f"coordinate {i_bad}: need {lower[i_bad]:.6g} < beta = "
                                       f"{beta_box[i_bad]:.6g} < {upper[i_bad]:.6g}"))
    if n:
        pi_ok = bool(np.all(params.pi >= 0.0) and np.all(np.diag(params.pi) == 0.0))
        conds.append(_exact("box.pi_structure", pi_ok,
                            "pi entrywise >= 0 with zero diagonal" if pi_ok else
                            f"pi = {params.pi.tolist()} breaks nonnegativity/zero-diagonal"))
        psi_neg = np.maximum(-params.psi, 0.0).sum(axis=1)
        ok = np.all(params.phi >= psi_neg)
        j_bad = next((j for j in range(n) if params.phi[j] < psi_neg[j]), None)
        conds.append(_exact("box.phi_bound", bool(ok),
                            "phi_j dominates the negative part of psi_j"
                            if ok else f"phi[{j_bad}] = {params.phi[j_bad]:.6g} < {psi_neg[j_bad]:.6g}"))

        tol_a = _EXACT_TOL * (1.0 + np.abs(params.alpha).max(initial=0.0))
        e_alpha = _eigmin(params.alpha)
        if e_alpha >= -tol_a:
            conds.append(ConditionResult("box.alpha_psd_shifted", "pass",
                                         f"alpha itself PSD (min eigenvalue {e_alpha:.6g}), shift is nonnegative"))
        else:
            rng = np.random.default_rng(711)
            U = rng.dirichlet(np.ones(n), samples)
            U = np.maximum(U, 1e-12)
            worst = np.inf
            worst_u = U[0]
            for u in U:
                shift = np.diag((params.pi.T @ u) / u)
                e = _eigmin(params.alpha + shift)
                if e < worst:
                    worst, worst_u = e, u
            if worst < -margin:
                conds.append(ConditionResult("box.alpha_psd_shifted", "fail",
                                             f"alpha + Diag(pi'u)/Diag(u) has eigenvalue {worst:.6g} < 0",
                                             witness=worst_u.tolist()))
            else:
                conds.append(ConditionResult("box.alpha_psd_shifted", "inconclusive",
                                             f"alpha not PSD alone; sampled shifted minimum {worst:.6g} "
                                             "cannot certify all of the orthant"))
        beta_orth = params.beta[m:]
        floor = np.maximum(-B[m:, :m], 0.0).sum(axis=1)
        ok = np.all(beta_orth > floor)
        j_bad = next((j for j in range(n) if not beta_orth[j] > floor[j]), None)
        conds.append(_exact("box.drift_orthant", bool(ok),
                            "inward drift on the orthant faces"
                            if ok else f"coordinate {m + j_bad}: need beta = {beta_orth[j_bad]:.6g} > {floor[j_bad]:.6g}"))
        off = B[m:, m:].copy()
        np.fill_diagonal(off, 0.0)
        ok = bool(np.all(off >= 0.0))
        conds.append(_exact("box.bjj_offdiag", ok,
                            "orthant drift coupling entries >= 0" if ok else
                            f"B orthant block has negative off-diagonal {off.min():.6g}"))
    if m and n:
        ok = bool(np.all(B[:m, m:] == 0.0))
        conds.append(_exact("box.b_structure", ok,
                            "box drift decoupled from orthant coordinates" if ok else
                            "B[I, J] block must vanish"))
    return ValidationReport("box_orthant", _verdict(conds), conds)


def _validate_simplex(space: Simplex, params: SimplexParams, samples: int, margin: float) -> ValidationReport:
    conds: list[ConditionResult] = []
    d = space.dim
    off = params.alpha[~np.eye(d, dtype=bool)]
    ok = bool(np.all(off >= 0.0))
    conds.append(_exact("simplex.alpha_structure", ok,
                        "exchange coefficients alpha_ij >= 0" if ok else
                        f"negative exchange coefficient {off.min():.6g}"))
    resid = params.B.T @ np.ones(d) + params.beta.sum() * np.ones(d)
    scale = 1.0 + np.abs(params.B).max(initial=0.0) + np.abs(params.beta).max(initial=0.0)
    ok = bool(np.abs(resid).max() <= _EXACT_TOL * scale)
    conds.append(_exact("simplex.drift_mass", ok,
                        "drift tangent to the mass constraint" if ok else
                        f"B'1 + (beta'1)1 = {resid.tolist()} != 0"))
    worst = np.inf
    worst_ij = (0, 1)
    for i in range(d):
        for j in range(d):
            if i != j:
                v = params.beta[i] + params.B[i, j]
                if v < worst:
                    worst, worst_ij = v, (i, j)
    ok = worst > 0.0
    conds.append(_exact("simplex.drift_corner", bool(ok),
                        f"inward drift at every vertex (min beta_i + B_ij = {worst:.6g} over i != j)"
                        if ok else
                        f"beta[{worst_ij[0]}] + B[{worst_ij[0]},{worst_ij[1]}] = {worst:.6g} <= 0"))
    return ValidationReport("simplex", _verdict(conds), conds)


def _validate_full(space: FullSpace, model: ModelCoefficients, samples: int, margin: float) -> ValidationReport:
    conds: list[ConditionResult] = []
    if all(model.a[i][j].degree <= 0 for i in range(space.dim) for j in range(space.dim)):
        A = model.a_eval(np.zeros(space.dim))
        e = _eigmin(A)
        conds.append(_exact("full.diffusion_psd", e >= -_EXACT_TOL * (1.0 + np.abs(A).max()),
                            f"constant diffusion matrix PSD (min eigenvalue {e:.6g})"))
    else:
        X = space.interior_samples(samples)
        A = model.a_eval(X)
        eig = np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, -1, -2))).min(axis=-1)
        worst = int(np.argmin(eig))
        if eig[worst] < -margin:
            conds.append(ConditionResult("full.diffusion_psd", "fail",
                                         f"diffusion eigenvalue {eig[worst]:.6g} < 0",
                                         witness=X[worst].tolist()))
        else:
            conds.append(ConditionResult("full.diffusion_psd", "inconclusive",
                                         "sampled PSD check passed but cannot certify all of R^d"))
    return ValidationReport("full", _verdict(conds), conds)


def validate_params(space: StateSpace, params, samples: int = 1000, margin: float = DEFAULT_MARGIN) -> ValidationReport:
    """Check the family-specific admissibility conditions of the parameters.

    Exact conditions decide Valid/Invalid outright; conditions quantified
    over infinite sets are sampled with a margin band and may come back
    Inconclusive.
    """
    if isinstance(space, Quadric):
        if not isinstance(params, QuadricParams):
            raise ValueError("quadric state space needs QuadricParams")
        return _validate_quadric(space, params, samples, margin)
    if isinstance(space, BoxOrthant):
        if not isinstance(params, BoxOrthantParams):
            raise ValueError("box-orthant state space needs BoxOrthantParams")
        return _validate_box_orthant(space, params, samples, margin)
    if isinstance(space, Simplex):
        if not isinstance(params, SimplexParams):
            raise ValueError("simplex state space needs SimplexParams")
        return _validate_simplex(space, params, samples, margin)
    if isinstance(space, FullSpace):
        if not isinstance(params, ModelCoefficients):
            raise ValueError("full state space validates raw ModelCoefficients")
        return _validate_full(space, params, samples, margin)
    raise ValueError(f"unknown state space family {type(space).__name__}")


# ---------------------------------------------------------------------------
# generic coefficient checks against an arbitrary (model, space) pair
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of the necessary or sufficient condition battery."""

    kind: str
    verdict: str
    conditions: list[ConditionResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def as_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "conditions": [c.as_json_dict() for c in self.conditions],
        }


def _check_verdict(conditions: list[ConditionResult]) -> str:
    if any(c.status == "fail" for c in conditions):
        return "fail"
    if any(c.status == "inconclusive" for c in conditions):
        return "inconclusive"
    return "pass"


def _a_grad(model: ModelCoefficients, p: Polynomial) -> list[Polynomial]:
    grad = p.grad()
    out = []
    for i in range(model.dim):
        s = Polynomial.zero(model.dim)
        for j in range(model.dim):
            if not grad[j].is_zero():
                s = s + model.a[i][j] * grad[j]
        out.append(s)
    return out


def _eval_vector(polys: list[Polynomial], X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.broadcast_to(np.asarray(p(X), dtype=float), (len(X),)) for p in polys])


def check_necessary(model: ModelCoefficients, space: StateSpace, samples: int = 400,
                    tol: float = DEFAULT_MARGIN) -> CheckReport:
    """Sampled necessary invariance conditions.

    On each boundary stratum {p = 0}: a grad p = 0 and G p >= 0.  On the
    whole set, for each equality q: a grad q = 0 and G q = 0.  Witness points
    are reported for every violation.
    """
    if model.dim != space.dim:
        raise ValueError("model and state space dimensions differ")
    conds: list[ConditionResult] = []
    for k, p in enumerate(space.inequalities):
        X = space.boundary_samples(k, samples)
        agp = _eval_vector(_a_grad(model, p), X)
        worst = int(np.argmax(np.abs(agp).max(axis=1)))
        bad = np.abs(agp[worst]).max()
        conds.append(ConditionResult(
            f"necessary.a_gradp_zero[{k}]",
            "pass" if bad <= tol else "fail",
            f"max |a grad p| on stratum {k} is {bad:.6g}",
            witness=None if bad <= tol else X[worst].tolist()))
        gp = np.asarray(apply_generator(model, p)(X), dtype=float)
        worst = int(np.argmin(gp))
        conds.append(ConditionResult(
            f"necessary.gp_nonneg[{k}]",
            "pass" if gp[worst] >= -tol else "fail",
            f"min G p on stratum {k} is {gp[worst]:.6g}",
            witness=None if gp[worst] >= -tol else X[worst].tolist()))
    if space.equalities:
        X = space.all_samples(samples)
        for k, q in enumerate(space.equalities):
            agq = _eval_vector(_a_grad(model, q), X)
            worst = int(np.argmax(np.abs(agq).max(axis=1)))
            bad = np.abs(agq[worst]).max()
            conds.append(ConditionResult(
                f"necessary.a_gradq_zero[{k}]",
                "pass" if bad <= tol else "fail",
                f"max |a grad q| on E is {bad:.6g}",
                witness=None if bad <= tol else X[worst].tolist()))
            gq = np.abs(np.asarray(apply_generator(model, q)(X), dtype=float))
            worst = int(np.argmax(gq))
            conds.append(ConditionResult(
                f"necessary.gq_zero[{k}]",
                "pass" if gq[worst] <= tol else "fail",
                f"max |G q| on E is {gq[worst]:.6g}",
                witness=None if gq[worst] <= tol else X[worst].tolist()))
    return CheckReport("necessary", _check_verdict(conds), conds)


def h_factor(model: ModelCoefficients, space: StateSpace, p: Polynomial) -> list[Polynomial]:
    """Certificate vector h with a grad p = h p modulo the equality ideal.

    Raises DivisionFailure when no exact factorization is found; that is a
    cannot-certify signal, not a disproof.
    """
    return [divide_exact(c, p, modulus=space.equalities) for c in _a_grad(model, p)]


def check_sufficient(model: ModelCoefficients, space: StateSpace, samples: int = 400,
                     margin: float = DEFAULT_MARGIN) -> CheckReport:
    """Sufficient-condition battery for existence of the diffusion on E.

    The diffusion matrix is sampled for positive semidefiniteness on E; the
    gradient condition a grad p = h p is certified symbolically by exact
    division; the strict boundary drift G p > 0 is sampled with a margin; and
    equality invariance (G q and a grad q vanish on the manifold) is checked
    symbolically after ideal reduction.
    """
    if model.dim != space.dim:
        raise ValueError("model and state space dimensions differ")
    conds: list[ConditionResult] = []
    X = space.all_samples(samples)
    A = model.a_eval(X)
    eig = np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, -1, -2))).min(axis=-1)
    worst = int(np.argmin(eig))
    conds.append(ConditionResult(
        "sufficient.diffusion_psd",
        "pass" if eig[worst] >= -margin else "fail",
        f"min diffusion eigenvalue on E samples is {eig[worst]:.6g}",
        witness=None if eig[worst] >= -margin else X[worst].tolist()))
    for k, p in enumerate(space.inequalities):
        try:
            h = h_factor(model, space, p)
            conds.append(ConditionResult(
                f"sufficient.gradient_certificate[{k}]", "pass",
                "a grad p = h p with h = [" + ", ".join(str(c) for c in h) + "]"))
        except DivisionFailure as exc:
            conds.append(ConditionResult(
                f"sufficient.gradient_certificate[{k}]", "inconclusive",
                f"no exact factorization found: {exc}"))
        Xb = space.boundary_samples(k, samples)
        gp = np.asarray(apply_generator(model, p)(Xb), dtype=float)
        conds.append(_sampled_sign(f"sufficient.boundary_drift[{k}]", gp, Xb, "pos", margin,
                                   f"G p > 0 on stratum {k}"))
    for k, q in enumerate(space.equalities):
        gq = space.reduce(apply_generator(model, q))
        ok = gq.is_zero()
        conds.append(ConditionResult(
            f"sufficient.manifold_drift[{k}]",
            "pass" if ok else "fail",
            "G q vanishes on the manifold" if ok else f"G q reduces to {gq}"))
        bad = None
        for i, c in enumerate(_a_grad(model, q)):
            r = space.reduce(c)
            if not r.is_zero():
                bad = (i, r)
                break
        conds.append(ConditionResult(
            f"sufficient.manifold_diffusion[{k}]",
            "pass" if bad is None else "fail",
            "a grad q vanishes on the manifold" if bad is None else
            f"(a grad q)_{bad[0]} reduces to {bad[1]}"))
    return CheckReport("sufficient", _check_verdict(conds), conds)


# ---------------------------------------------------------------------------
# boundary attainment
# ---------------------------------------------------------------------------


@dataclass
class BoundaryVerdict:
    """Classification of a boundary stratum: does the diffusion reach it?"""

    verdict: str  # "Attain" | "NonAttainStrict" | "NonAttainCritical" | "Inconclusive"
    stratum: int
    detail: str = ""
    witness: list | None = None
    h: list[Polynomial] | None = None

    def as_json_dict(self) -> dict:
        out = {"verdict": self.verdict, "stratum": self.stratum, "detail": self.detail}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.h is not None:
            out["h"] = [c.to_json_dict() for c in self.h]
        return out


def _collar_points(space: StateSpace, p: Polynomial, X: np.ndarray, deltas) -> np.ndarray:
    """Interior points near the stratum: step inward along the tangentialized
    gradient of p and re-project."""
    G = np.column_stack([np.broadcast_to(np.asarray(g(X), dtype=float), (len(X),)) for g in p.grad()])
    for q in space.equalities:
        Nq = np.column_stack([np.broadcast_to(np.asarray(g(X), dtype=float), (len(X),)) for g in q.grad()])
        nn = np.einsum("ki,ki->k", Nq, Nq)
        nn[nn == 0.0] = 1.0
        G = G - (np.einsum("ki,ki->k", G, Nq) / nn)[:, None] * Nq
    norms = np.linalg.norm(G, axis=1)
    keep = norms > 0.0
    X, G, norms = X[keep], G[keep], norms[keep]
    out = []
    for delta in deltas:
        C = space.project(X + delta * G / norms[:, None])
        vals = np.asarray(p(C), dtype=float)
        out.append(C[vals > 0.0])
    return np.vstack(out) if out else np.empty((0, space.dim))


def classify_boundary(
    model: ModelCoefficients,
    space: StateSpace,
    p: Polynomial,
    samples: int = 400,
    margin: float = DEFAULT_MARGIN,
    collar=(1e-2, 1e-3, 1e-4),
) -> BoundaryVerdict:
    """Decide whether the stratum {p = 0} is attained by the diffusion.

    Uses the certificate h (a grad p = h p) and the test expression
    e = 2 G p - h . grad p:  e identically zero on the stratum (after ideal
    reduction) or e >= 0 near the stratum rule attainment out; a boundary
    point with G p >= 0 and e < 0 certifies attainment.
    """
    try:
        stratum = list(space.inequalities).index(p)
    except ValueError:
        raise ValueError("p must be one of the state-space inequality polynomials") from None
    try:
        h = h_factor(model, space, p)
    except DivisionFailure as exc:
        return BoundaryVerdict("Inconclusive", stratum, f"no gradient certificate: {exc}")
    gp = apply_generator(model, p)
    grad = p.grad()
    e = 2.0 * gp
    for hi, gi in zip(h, grad):
        e = e - hi * gi

    e_red = space.reduce(e)
    if e_red.is_zero():
        return BoundaryVerdict("NonAttainCritical", stratum,
                               "e = 2 G p - h . grad p vanishes identically on the manifold", h=h)
    try:
        divide_exact(e_red, p, modulus=space.equalities)
        return BoundaryVerdict("NonAttainCritical", stratum,
                               "e = 2 G p - h . grad p vanishes identically on the stratum", h=h)
    except DivisionFailure:
        pass

    Xb = space.boundary_samples(stratum, samples)
    e_vals = np.asarray(e(Xb), dtype=float)
    gp_vals = np.asarray(gp(Xb), dtype=float)
    attain = (gp_vals >= -1e-12) & (e_vals < -margin)
    if np.any(attain):
        w = int(np.flatnonzero(attain)[0])
        return BoundaryVerdict("Attain", stratum,
                               f"boundary point with G p = {gp_vals[w]:.6g} >= 0 and e = {e_vals[w]:.6g} < 0",
                               witness=Xb[w].tolist(), h=h)

    Xc = _collar_points(space, p, Xb, collar)
    near_vals = np.concatenate([e_vals, np.asarray(e(Xc), dtype=float)]) if len(Xc) else e_vals
    if np.all(near_vals >= margin):
        return BoundaryVerdict("NonAttainStrict", stratum,
                               f"e >= {near_vals.min():.6g} > 0 on the stratum and a collar around it", h=h)
    return BoundaryVerdict("Inconclusive", stratum,
                           f"sampled e range [{near_vals.min():.6g}, {near_vals.max():.6g}] decides neither case",
                           h=h)


# ---------------------------------------------------------------------------
# uniqueness in law
# ---------------------------------------------------------------------------


@dataclass
class UniquenessReport:
    """Which uniqueness criterion, if any, applies to the pair (model, E)."""

    verdict: str  # "UniqueInLaw" | "Unknown"
    reason: str | None = None
    supported_by_sampling: bool = False
    detail: str = ""

    def as_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "supported_by_sampling": self.supported_by_sampling,
            "detail": self.detail,
        }


def _linear_growth(model: ModelCoefficients) -> bool:
    return all(model.a[i][j].homogeneous_part(2).is_zero()
               for i in range(model.dim) for j in range(model.dim))


def _sub_block_compact(space: StateSpace, m: int) -> bool:
    if space.is_compact:
        return True  # continuous projections of compact sets are compact
    if isinstance(space, BoxOrthant) and m <= space.m:
        return True
    return False


def _lipschitz_in_z_supported(model: ModelCoefficients, space: StateSpace, m: int) -> tuple[bool, str]:
    """Sampled local-Lipschitz check of the z-rows of the dispersion."""
    d = model.dim
    rng = np.random.default_rng(1302)
    base = space.interior_samples(48)
    # probe near the lower edge of the z-range too, where square roots blow up
    edge = base.copy()
    edge[:, m:] = np.maximum(edge[:, m:] * 1e-8, 1e-10)
    edge = space.project(edge)
    points = np.vstack([base, edge])
    scales = (1e-1, 1e-3, 1e-6)
    ratios = []
    for scale in scales:
        # positive directions so clipping projections cannot collapse the
        # probe distance and mask a square-root singularity at the edge
        dirs = np.abs(rng.standard_normal((len(points), d - m)))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        moved = points.copy()
        moved[:, m:] = moved[:, m:] + scale * dirs
        moved = space.project(moved)
        same_y = np.abs(moved[:, :m] - points[:, :m]).max(axis=1) if m else np.zeros(len(points))
        dz = np.linalg.norm(moved[:, m:] - points[:, m:], axis=1)
        ok = (same_y <= 1e-14) & (dz > 0.0)
        if not np.any(ok):
            ratios.append(0.0)
            continue
        s1 = dispersion(model, points[ok])[:, m:, :]
        s2 = dispersion(model, moved[ok])[:, m:, :]
        num = np.linalg.norm((s1 - s2).reshape(len(s1), -1), axis=1)
        ratios.append(float(np.max(num / dz[ok])))
    blowup = ratios[-1] > 50.0 * (ratios[0] + 1e-9)
    detail = "dispersion z-rows difference ratios at scales {}: {}".format(
        scales, [f"{r:.3g}" for r in ratios])
    return (not blowup), detail


def uniqueness_report(model: ModelCoefficients, space: StateSpace) -> UniquenessReport:
    """Try the known sufficient criteria for uniqueness in law, in order:
    linear growth of the diffusion matrix (automatic on compact sets), scalar
    state, then a hierarchical split with an autonomous first block."""
    if model.dim != space.dim:
        raise ValueError("model and state space dimensions differ")
    if _linear_growth(model) or space.is_compact:
        return UniquenessReport(
            "UniqueInLaw", "LinearGrowth", False,
            "diffusion matrix grows at most linearly on the state space")
    if model.dim == 1:
        return UniquenessReport("UniqueInLaw", "Dimension1", False, "scalar diffusions are unique in law")
    d = model.dim
    for m in range(1, d):
        y_vars = set(range(m))
        a_ok = all(model.a[i][j].variables_used() <= y_vars for i in range(m) for j in range(m))
        b_ok = all(model.b[i].variables_used() <= y_vars for i in range(m))
        if not (a_ok and b_ok):
            continue
        sub_linear = all(model.a[i][j].homogeneous_part(2).is_zero() for i in range(m) for j in range(m))
        if not (sub_linear or m == 1 or _sub_block_compact(space, m)):
            continue
        supported, detail = _lipschitz_in_z_supported(model, space, m)
        if supported:
            return UniquenessReport(
                "UniqueInLaw", "Hierarchical", True,
                f"autonomous first block of size {m}; {detail}")
    return UniquenessReport("Unknown", None, False, "no sufficient uniqueness criterion applies")
