"""State-space geometry for polynomial diffusion models.

Each state space is cut out of R^d by polynomial inequalities ``p >= 0``
(the ``inequalities`` list) inside an algebraic manifold ``q = 0`` (the
``equalities`` list).  Four families are built in: the whole space, a
quadric solid, the mixed unit-box/orthant product, and the unit simplex.

All samplers are deterministic: they draw from fixed-seed generators and
structured log grids, so repeated runs see identical points.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .generator import ModelCoefficients
from .polynomial import Polynomial

__all__ = [
    "StateSpace",
    "FullSpace",
    "Quadric",
    "BoxOrthant",
    "Simplex",
    "QuadricParams",
    "BoxOrthantParams",
    "SimplexParams",
    "assemble_model",
    "skew_symmetric_basis",
    "MEMBERSHIP_TOL",
]

MEMBERSHIP_TOL = 1e-9

_SAMPLER_SEED = 20240917
_LOG_RANGE = (-3.0, 3.0)  # unbounded directions are probed on [1e-3, 1e3]


def _rng(*salt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_SAMPLER_SEED, spawn_key=salt))


def _unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((count, dim))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return z / norms


class StateSpace(ABC):
    """Base class: polynomial membership, deterministic samplers, projection."""

    dim: int
    family: str
    inequalities: tuple[Polynomial, ...]
    equalities: tuple[Polynomial, ...]

    # number of free coordinates used by monomial bases (dim, or dim-1 when
    # one coordinate is eliminated through an affine equality)
    @property
    def basis_variables(self) -> int:
        return self.dim

    def reduce(self, p: Polynomial) -> Polynomial:
        """Canonical representative of p modulo the equality ideal."""
        if p.dim != self.dim:
            raise ValueError(f"polynomial dimension {p.dim} != state space dimension {self.dim}")
        return p

    @abstractmethod
    def violation(self, x) -> np.ndarray | float:
        """Max constraint violation at x (0 for points inside).  Batched."""

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool | np.ndarray:
        return self.violation(x) <= tol

    @abstractmethod
    def project(self, x) -> np.ndarray:
        """Closed-form (near-)metric projection onto the state space.  Batched."""

    @abstractmethod
    def interior_samples(self, count: int) -> np.ndarray:
        """Deterministic points of E, shape (count, dim)."""

    def boundary_samples(self, index: int, count: int) -> np.ndarray:
        """Deterministic points of E intersected with {inequalities[index] = 0}."""
        raise IndexError(f"state space {self.family} has no boundary stratum {index}")

    def all_samples(self, count: int) -> np.ndarray:
        """Interior plus every boundary stratum, for whole-space sampled checks."""
        parts = [self.interior_samples(count)]
        per = max(count // max(len(self.inequalities), 1), 8)
        for k in range(len(self.inequalities)):
            parts.append(self.boundary_samples(k, per))
        return np.vstack(parts)

    @property
    def is_compact(self) -> bool:
        return False

    def spec_dict(self) -> dict:
        return {"family": self.family}

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class FullSpace(StateSpace):
    """All of R^d: no inequalities, no equalities."""

    family = "full"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.inequalities = ()
        self.equalities = ()

    def violation(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0

    def project(self, x):
        return np.asarray(x, dtype=float)

    def interior_samples(self, count: int) -> np.ndarray:
        rng = _rng(1)
        u = _unit_vectors(rng, count, self.dim)
        radii = np.concatenate([[0.0], np.geomspace(10.0 ** _LOG_RANGE[0], 10.0 ** _LOG_RANGE[1], count - 1)])
        return u * radii[:, None]

    def spec_dict(self) -> dict:
        return {"family": "full", "dim": self.dim}


class Quadric(StateSpace):
    """Solid quadric {x'Qx <= 1} (orientation "inside") or its complement
    closure {x'Qx >= 1} ("outside"), with Q diagonal with entries +-1."""

    family = "quadric"

    def __init__(self, Q, orientation: str = "inside"):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be a square matrix")
        d = Q.shape[0]
        if not np.array_equal(Q, np.diag(np.diag(Q))) or not np.all(np.abs(np.diag(Q)) == 1.0):
            raise ValueError("Q must be diagonal with entries +1/-1 (normalized form)")
        if not np.any(np.diag(Q) == 1.0):
            raise ValueError("Q needs at least one +1 diagonal entry, else {x'Qx = 1} is empty")
        if orientation not in ("inside", "outside"):
            raise ValueError("orientation must be 'inside' or 'outside'")
        self.dim = d
        self.Q = Q
        self.orientation = orientation
        terms = {tuple(0 for _ in range(d)): 1.0}
        for i in range(d):
            e = [0] * d
            e[i] = 2
            terms[tuple(e)] = -Q[i, i]
        p = Polynomial(d, terms)  # 1 - x'Qx
        self.inequalities = (p if orientation == "inside" else -p,)
        self.equalities = ()
        self._plus = np.flatnonzero(np.diag(Q) == 1.0)
        self._minus = np.flatnonzero(np.diag(Q) == -1.0)

    def _qform(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum(x * x * np.diag(self.Q), axis=-1)

    def violation(self, x):
        q = self._qform(x)
        v = q - 1.0 if self.orientation == "inside" else 1.0 - q
        return np.maximum(v, 0.0)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x).astype(float).copy()
        q = self._qform(X)
        if self.orientation == "inside":
            bad = q > 1.0
            if np.any(bad):
                X[bad] /= np.sqrt(q[bad])[:, None]
        else:
            bad = q < 1.0
            pos = bad & (q > 1e-12)
            if np.any(pos):
                X[pos] /= np.sqrt(q[pos])[:, None]
            rest = bad & ~pos
            if np.any(rest):
                # radial scaling undefined near the cone x'Qx <= 0: push along
                # the first +1 coordinate until the quadric is reached
                i = self._plus[0]
                xi = X[rest, i]
                t = -xi + np.sqrt(xi * xi + 1.0 - q[rest])
                X[rest, i] = xi + t
        return X[0] if single else X

    def boundary_samples(self, index: int, count: int) -> np.ndarray:
        if index != 0:
            raise IndexError("quadric has a single boundary stratum")
        rng = _rng(2)
        d_plus, d_minus = len(self._plus), len(self._minus)
        u = _unit_vectors(rng, count, d_plus)
        X = np.zeros((count, self.dim))
        if d_minus == 0:
            X[:, self._plus] = u
            return X
        w = _unit_vectors(rng, count, d_minus)
        radii = np.concatenate([np.zeros(max(count // 4, 1)), np.geomspace(1e-3, 1e3, count - max(count // 4, 1))])
        X[:, self._minus] = w * radii[:, None]
        X[:, self._plus] = u * np.sqrt(1.0 + radii * radii)[:, None]
        return X

    def interior_samples(self, count: int) -> np.ndarray:
        rng = _rng(3)
        if self.orientation == "inside":
            if len(self._minus) == 0:
                u = _unit_vectors(rng, count, self.dim)
                r = rng.random(count) ** (1.0 / self.dim)
                x = u * r[:, None]
                x[0] = 0.0
                return x
            # unbounded solid: points on inner shells of the boundary sampler
            shells = self.boundary_samples(0, count)
            scales = np.linspace(0.0, 0.95, count)
            return shells * scales[:, None]
        shells = self.boundary_samples(0, count)
        scales = np.concatenate([np.ones(1), np.geomspace(1.001, 1e3, count - 1)])
        return shells * scales[:, None]

    @property
    def is_compact(self) -> bool:
        return self.orientation == "inside" and len(self._minus) == 0

    def spec_dict(self) -> dict:
        return {"family": "quadric", "Q": np.diag(self.Q).tolist(), "orientation": self.orientation}


class BoxOrthant(StateSpace):
    """Product [0,1]^m x R^n_+ with the box block first."""

    family = "box_orthant"

    def __init__(self, m: int, n: int):
        if m < 0 or n < 0 or m + n < 1:
            raise ValueError("need m >= 0, n >= 0, m + n >= 1")
        self.m = m
        self.n = n
        self.dim = m + n
        d = self.dim
        ineq: list[Polynomial] = []
        descr: list[tuple[str, int]] = []
        for i in range(m):
            ineq.append(Polynomial.variable(i, d))
            descr.append(("low", i))
            ineq.append(Polynomial.one(d) - Polynomial.variable(i, d))
            descr.append(("high", i))
        for j in range(m, d):
            ineq.append(Polynomial.variable(j, d))
            descr.append(("low", j))
        self.inequalities = tuple(ineq)
        self.stratum_descriptors = tuple(descr)
        self.equalities = ()

    def violation(self, x):
        x = np.asarray(x, dtype=float)
        v = np.maximum(-x[..., : self.dim], 0.0).max(axis=-1)
        if self.m:
            v = np.maximum(v, np.maximum(x[..., : self.m] - 1.0, 0.0).max(axis=-1))
        return v

    def project(self, x):
        x = np.asarray(x, dtype=float)
        out = np.maximum(x, 0.0)
        if self.m:
            out = out.copy()
            out[..., : self.m] = np.minimum(out[..., : self.m], 1.0)
        return out

    def _fill_free(self, X: np.ndarray, rng: np.random.Generator, skip: int | None = None) -> None:
        count = X.shape[0]
        lo, hi = _LOG_RANGE
        for c in range(self.dim):
            if c == skip:
                continue
            if c < self.m:
                X[:, c] = rng.random(count)
            else:
                X[:, c] = 10.0 ** rng.uniform(lo, hi, count)
        # a deterministic tail of near-corner points so binding constraints
        # show up as witnesses
        tail = max(count // 4, 1)
        for c in range(self.dim):
            if c == skip:
                continue
            if c < self.m:
                X[-tail:, c] = rng.integers(0, 2, tail).astype(float)
            else:
                X[-tail:, c] = rng.choice([0.0, 1e-3, 1.0, 1e3], tail)

    def boundary_samples(self, index: int, count: int) -> np.ndarray:
        side, coord = self.stratum_descriptors[index]
        rng = _rng(4, index)
        X = np.empty((count, self.dim))
        self._fill_free(X, rng, skip=coord)
        X[:, coord] = 0.0 if side == "low" else 1.0
        return X

    def interior_samples(self, count: int) -> np.ndarray:
        rng = _rng(5)
        X = np.empty((count, self.dim))
        self._fill_free(X, rng)
        return X

    @property
    def is_compact(self) -> bool:
        return self.n == 0

    def spec_dict(self) -> dict:
        return {"family": "box_orthant", "m": self.m, "n": self.n}


class Simplex(StateSpace):
    """Unit simplex {x >= 0, x_1 + ... + x_d = 1}."""

    family = "simplex"

    def __init__(self, dim: int):
        if dim < 2:
            raise ValueError("simplex needs dim >= 2")
        self.dim = dim
        d = dim
        self.inequalities = tuple(Polynomial.variable(i, d) for i in range(d))
        one = Polynomial.one(d)
        total = sum((Polynomial.variable(i, d) for i in range(d)), Polynomial.zero(d))
        self.equalities = (one - total,)

    @property
    def basis_variables(self) -> int:
        return self.dim - 1

    def reduce(self, p: Polynomial) -> Polynomial:
        """Eliminate the last coordinate via x_d = 1 - x_1 - ... - x_{d-1}."""
        if p.dim != self.dim:
            raise ValueError(f"polynomial dimension {p.dim} != state space dimension {self.dim}")
        d = self.dim
        last = d - 1
        sub = Polynomial.one(d) - sum(
            (Polynomial.variable(i, d) for i in range(last)), Polynomial.zero(d)
        )
        powers = {0: Polynomial.one(d)}
        out = Polynomial.zero(d)
        for e, c in p.terms.items():
            k = e[last]
            if k not in powers:
                powers[k] = powers[max(powers)] * sub ** (k - max(powers))
            head = Polynomial(d, {e[:last] + (0,): c})
            out = out + head * powers[k]
        return out

    def violation(self, x):
        x = np.asarray(x, dtype=float)
        v = np.maximum(-x, 0.0).max(axis=-1)
        return np.maximum(v, np.abs(1.0 - x.sum(axis=-1)))

    def project(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x).astype(float)
        d = self.dim
        u = np.sort(X, axis=1)[:, ::-1]
        css = np.cumsum(u, axis=1) - 1.0
        ks = np.arange(1, d + 1)
        cond = u - css / ks > 0.0
        rho = d - 1 - np.argmax(cond[:, ::-1], axis=1)
        theta = css[np.arange(X.shape[0]), rho] / (rho + 1.0)
        out = np.maximum(X - theta[:, None], 0.0)
        return out[0] if single else out

    def boundary_samples(self, index: int, count: int) -> np.ndarray:
        if not 0 <= index < self.dim:
            raise IndexError("simplex stratum index out of range")
        rng = _rng(6, index)
        d = self.dim
        X = np.zeros((count, d))
        rest = [i for i in range(d) if i != index]
        if len(rest) == 1:
            X[:, rest[0]] = 1.0
            return X
        X[:, rest] = rng.dirichlet(np.ones(len(rest)), count)
        # vertices of the face
        for k, i in enumerate(rest[: min(len(rest), count)]):
            X[-1 - k] = 0.0
            X[-1 - k, i] = 1.0
        return X

    def interior_samples(self, count: int) -> np.ndarray:
        rng = _rng(7)
        X = rng.dirichlet(np.ones(self.dim), count)
        X[0] = 1.0 / self.dim
        return X

    @property
    def is_compact(self) -> bool:
        return True

    def spec_dict(self) -> dict:
        return {"family": "simplex", "dim": self.dim}


# ---------------------------------------------------------------------------
# parameter bundles and model assembly
# ---------------------------------------------------------------------------


def skew_symmetric_basis(d: int) -> list[np.ndarray]:
    """Basis E_ij - E_ji of the skew-symmetric matrices, (i, j) in lex order."""
    out = []
    for i in range(d):
        for j in range(i + 1, d):
            S = np.zeros((d, d))
            S[i, j] = 1.0
            S[j, i] = -1.0
            out.append(S)
    return out


def _as_matrix(x, shape, name):
    a = np.asarray(x, dtype=float)
    if a.shape != shape:
        # accept [] for any zero-size block so JSON specs need no shaped empties
        if a.size == 0 and int(np.prod(shape)) == 0:
            return np.zeros(shape)
        raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _require_symmetric(a, name, tol=1e-12):
    if not np.allclose(a, a.T, rtol=0.0, atol=tol * (1.0 + np.abs(a).max(initial=0.0))):
        raise ValueError(f"{name} must be symmetric")
    return 0.5 * (a + a.T)


@dataclass(eq=False)
class QuadricParams:
    """Diffusion/drift parameters for a quadric state space.

    a(x) = (1 - x'Qx) alpha + c(x) with c built from the coefficient matrix
    ``gamma`` over the skew-symmetric basis, and b(x) = beta + B x.
    """

    alpha: np.ndarray
    beta: np.ndarray
    B: np.ndarray
    gamma: np.ndarray | None = None

    def __post_init__(self):
        d = np.asarray(self.beta, dtype=float).shape[0]
        self.alpha = _require_symmetric(_as_matrix(self.alpha, (d, d), "alpha"), "alpha")
        self.beta = _as_matrix(self.beta, (d,), "beta")
        self.B = _as_matrix(self.B, (d, d), "B")
        k = d * (d - 1) // 2
        if self.gamma is None:
            self.gamma = np.zeros((k, k))
        self.gamma = _require_symmetric(_as_matrix(self.gamma, (k, k), "gamma"), "gamma")

    @property
    def dim(self) -> int:
        return self.beta.shape[0]


@dataclass(eq=False)
class BoxOrthantParams:
    """Parameters on [0,1]^m x R^n_+.

    Box coordinates i carry a_ii = gamma_i x_i (1 - x_i); orthant coordinates
    j carry a_jj = alpha_jj x_j^2 + x_j (phi_j + psi_j . x_I + pi_j . x_J) and
    a_jk = alpha_jk x_j x_k.  Drift b(x) = beta + B x.
    """

    m: int
    n: int
    gamma: np.ndarray
    alpha: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    pi: np.ndarray
    beta: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        m, n = int(self.m), int(self.n)
        d = m + n
        self.gamma = _as_matrix(self.gamma, (m,), "gamma")
        self.alpha = _require_symmetric(_as_matrix(self.alpha, (n, n), "alpha"), "alpha") if n else np.zeros((0, 0))
        self.phi = _as_matrix(self.phi, (n,), "phi")
        self.psi = _as_matrix(self.psi, (n, m), "psi")
        self.pi = _as_matrix(self.pi, (n, n), "pi")
        self.beta = _as_matrix(self.beta, (d,), "beta")
        self.B = _as_matrix(self.B, (d, d), "B")

    @property
    def dim(self) -> int:
        return self.m + self.n


@dataclass(eq=False)
class SimplexParams:
    """Parameters on the unit simplex: a_ij = -alpha_ij x_i x_j off-diagonal
    (rows summing to zero) and b(x) = beta + B x."""

    alpha: np.ndarray
    beta: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.beta, dtype=float).shape[0]
        self.alpha = _require_symmetric(_as_matrix(self.alpha, (d, d), "alpha"), "alpha")
        self.beta = _as_matrix(self.beta, (d,), "beta")
        self.B = _as_matrix(self.B, (d, d), "B")

    @property
    def dim(self) -> int:
        return self.beta.shape[0]


def _linear_drift(beta: np.ndarray, B: np.ndarray) -> list[Polynomial]:
    d = beta.shape[0]
    out = []
    for i in range(d):
        p = Polynomial.constant(d, beta[i])
        for j in range(d):
            if B[i, j] != 0.0:
                p = p + B[i, j] * Polynomial.variable(j, d)
        out.append(p)
    return out


def _quadric_c_polys(space: Quadric, gamma: np.ndarray) -> list[list[Polynomial]]:
    d = space.dim
    S = skew_symmetric_basis(d)
    QS = [space.Q @ s for s in S]
    c = [[Polynomial.zero(d) for _ in range(d)] for _ in range(d)]
    if not len(S):
        return c
    for i in range(d):
        for j in range(d):
            M = np.zeros((d, d))
            for k in range(len(S)):
                for l in range(len(S)):
                    if gamma[k, l] != 0.0:
                        M += gamma[k, l] * np.outer(QS[k][i], QS[l][j])
            terms = {}
            for u in range(d):
                for v in range(d):
                    if M[u, v] != 0.0:
                        e = [0] * d
                        e[u] += 1
                        e[v] += 1
                        e = tuple(e)
                        terms[e] = terms.get(e, 0.0) + M[u, v]
            c[i][j] = Polynomial(d, terms)
    return c


def assemble_model(space: StateSpace, params) -> ModelCoefficients:
    """Build the polynomial diffusion coefficients (a, b) for a family.

    Raises ValueError on structural violations (wrong family, bad shapes,
    negative box factors, pi with negative entries or nonzero diagonal).
    Inequality-type admissibility conditions are the validator's job.
    """
    if isinstance(space, Quadric):
        if not isinstance(params, QuadricParams) or params.dim != space.dim:
            raise ValueError("quadric state space needs QuadricParams of matching dimension")
        d = space.dim
        p = space.inequalities[0] if space.orientation == "inside" else -space.inequalities[0]
        c = _quadric_c_polys(space, params.gamma)
        a = [[p * params.alpha[i, j] + c[i][j] for j in range(d)] for i in range(d)]
        return ModelCoefficients(a, _linear_drift(params.beta, params.B))

    if isinstance(space, BoxOrthant):
        if not isinstance(params, BoxOrthantParams) or (params.m, params.n) != (space.m, space.n):
            raise ValueError("box-orthant state space needs BoxOrthantParams with matching (m, n)")
        if np.any(params.gamma < 0.0):
            raise ValueError("box factors gamma must be nonnegative")
        if np.any(params.pi < 0.0) or np.any(np.diag(params.pi) != 0.0):
            raise ValueError("pi must be entrywise nonnegative with zero diagonal")
        m, n, d = space.m, space.n, space.dim
        a = [[Polynomial.zero(d) for _ in range(d)] for _ in range(d)]
        for i in range(m):
            xi = Polynomial.variable(i, d)
            a[i][i] = params.gamma[i] * xi * (Polynomial.one(d) - xi)
        for j in range(n):
            cj = m + j
            xj = Polynomial.variable(cj, d)
            lin = Polynomial.constant(d, params.phi[j])
            for i in range(m):
                if params.psi[j, i] != 0.0:
                    lin = lin + params.psi[j, i] * Polynomial.variable(i, d)
            for k in range(n):
                if params.pi[j, k] != 0.0:
                    lin = lin + params.pi[j, k] * Polynomial.variable(m + k, d)
            a[cj][cj] = params.alpha[j, j] * xj * xj + xj * lin
            for k in range(j + 1, n):
                ck = m + k
                cross = params.alpha[j, k] * xj * Polynomial.variable(ck, d)
                a[cj][ck] = cross
                a[ck][cj] = cross
        return ModelCoefficients(a, _linear_drift(params.beta, params.B))

    if isinstance(space, Simplex):
        if not isinstance(params, SimplexParams) or params.dim != space.dim:
            raise ValueError("simplex state space needs SimplexParams of matching dimension")
        d = space.dim
        a = [[Polynomial.zero(d) for _ in range(d)] for _ in range(d)]
        for i in range(d):
            diag = Polynomial.zero(d)
            xi = Polynomial.variable(i, d)
            for j in range(d):
                if j == i:
                    continue
                cross = params.alpha[i, j] * xi * Polynomial.variable(j, d)
                diag = diag + cross
                a[i][j] = -cross
            a[i][i] = diag
        return ModelCoefficients(a, _linear_drift(params.beta, params.B))

    if isinstance(space, FullSpace):
        if not isinstance(params, ModelCoefficients) or params.dim != space.dim:
            raise ValueError("full space takes raw ModelCoefficients of matching dimension")
        return params

    raise ValueError(f"unknown state space family {type(space).__name__}")
