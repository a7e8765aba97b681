"""Infinitesimal generator of a polynomial diffusion and closed-form moments.

A model is a pair of coefficient families: a symmetric matrix ``a`` of
polynomials of degree <= 2 and a drift vector ``b`` of polynomials of degree
<= 1.  The generator G f = tr(a Hess f)/2 + b . grad f maps polynomials of
degree <= n to polynomials of degree <= n, so on a monomial basis it is a
finite matrix and conditional moments are matrix exponentials:

    E[p(X_{t+tau}) | X_t = x] = H(x)' expm(tau G) pvec.

An adaptive RK4 integration of the transpose flow dF/ds = G' F serves as an
independent cross-check of the exponential route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .basis import Basis, DegreeTooHigh, monomial_basis
from .polynomial import Polynomial

__all__ = [
    "ModelCoefficients",
    "GeneratorMatrix",
    "NotPolynomialOnE",
    "PointOutsideStateSpace",
    "StepSizeUnderflow",
    "apply_generator",
    "generator_matrix",
    "matrix_exp",
    "conditional_moment",
    "joint_moment",
    "moment_by_ode",
]


class NotPolynomialOnE(ValueError):
    """The coefficients do not define a generator of the polynomial space on E."""


class PointOutsideStateSpace(ValueError):
    """Evaluation point violates the state-space constraints beyond tolerance."""


class StepSizeUnderflow(RuntimeError):
    """Adaptive integrator could not meet the tolerance with a sane step."""


class ModelCoefficients:
    """Symmetric polynomial diffusion matrix ``a`` (degree <= 2) and affine
    drift ``b`` (degree <= 1) in a common dimension."""

    __slots__ = ("_a", "_b", "_dim")

    def __init__(self, a: Sequence[Sequence[Polynomial]], b: Sequence[Polynomial]):
        b = tuple(b)
        if not b:
            raise ValueError("empty drift vector")
        d = b[0].dim
        if len(b) != d or any(p.dim != d for p in b):
            raise ValueError("drift must be a d-vector of polynomials in d variables")
        a = tuple(tuple(row) for row in a)
        if len(a) != d or any(len(row) != d for row in a):
            raise ValueError("diffusion matrix must be d x d")
        for i in range(d):
            for j in range(d):
                if a[i][j].dim != d:
                    raise ValueError("diffusion entries must live in the model dimension")
                if a[i][j] != a[j][i]:
                    raise ValueError(f"diffusion matrix not symmetric at ({i},{j})")
                if a[i][j].degree > 2:
                    raise ValueError(f"diffusion entry ({i},{j}) has degree {a[i][j].degree} > 2")
        for i, p in enumerate(b):
            if p.degree > 1:
                raise ValueError(f"drift entry {i} has degree {p.degree} > 1")
        self._a = a
        self._b = b
        self._dim = d

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def a(self) -> tuple[tuple[Polynomial, ...], ...]:
        return self._a

    @property
    def b(self) -> tuple[Polynomial, ...]:
        return self._b

    def a_eval(self, x) -> np.ndarray:
        """Diffusion matrix at x; batch shape (..., d) gives (..., d, d)."""
        x = np.asarray(x, dtype=float)
        d = self._dim
        out = np.empty(x.shape[:-1] + (d, d))
        for i in range(d):
            for j in range(i, d):
                v = self._a[i][j](x)
                out[..., i, j] = v
                out[..., j, i] = v
        return out

    def b_eval(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cols = [p(x) for p in self._b]
        return np.stack([np.asarray(c, dtype=float) for c in cols], axis=-1)

    def __eq__(self, other):
        if not isinstance(other, ModelCoefficients):
            return NotImplemented
        return self._a == other._a and self._b == other._b

    def __hash__(self):
        return hash((self._a, self._b))

    def __repr__(self):
        return f"ModelCoefficients(dim={self._dim})"


def apply_generator(model: ModelCoefficients, p: Polynomial) -> Polynomial:
    """G p = tr(a Hess p)/2 + b . grad p."""
    if p.dim != model.dim:
        raise ValueError(f"polynomial dimension {p.dim} != model dimension {model.dim}")
    d = model.dim
    grad = p.grad()
    out = Polynomial.zero(d)
    for i in range(d):
        if not grad[i].is_zero():
            out = out + model.b[i] * grad[i]
        for j in range(d):
            hij = grad[i].partial(j)
            if not hij.is_zero():
                out = out + 0.5 * model.a[i][j] * hij
    return out


@dataclass
class GeneratorMatrix:
    """Matrix of the generator on a monomial basis (columns are images)."""

    basis: Basis
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        n = len(self.basis)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} != ({n}, {n})")

    @property
    def size(self) -> int:
        return len(self.basis)

    def propagator(self, tau: float) -> np.ndarray:
        """expm(tau G)."""
        return matrix_exp(tau * self.matrix)

    def csv_text(self) -> str:
        """Row-major CSV with monomial-exponent headers."""
        header = ",".join("x" + " ".join(str(k) for k in e) for e in self.basis.monomials)
        lines = [header]
        for row in self.matrix:
            lines.append(",".join(format(v, ".17g") for v in row))
        return "\n".join(lines) + "\n"


def generator_matrix(model: ModelCoefficients, basis: Basis) -> GeneratorMatrix:
    """Represent the generator on the basis, reducing by the equality ideal.

    When the state space carries equalities, the generator must be well
    defined on the quotient: for each equality q both G q and a grad q have
    to vanish on the manifold.  Otherwise the matrix would depend on the
    choice of representatives and NotPolynomialOnE is raised.
    """
    space = basis.statespace
    if model.dim != space.dim:
        raise ValueError("model and basis dimensions differ")
    for q in space.equalities:
        gq = space.reduce(apply_generator(model, q))
        if not gq.is_zero():
            raise NotPolynomialOnE(f"G q = {gq} does not vanish on the manifold (q = {q})")
        grad_q = q.grad()
        for i in range(space.dim):
            s = Polynomial.zero(space.dim)
            for j in range(space.dim):
                s = s + model.a[i][j] * grad_q[j]
            if not space.reduce(s).is_zero():
                raise NotPolynomialOnE(f"(a grad q)_{i} does not vanish on the manifold (q = {q})")
    cols = []
    for e in basis.monomials:
        image = apply_generator(model, Polynomial.monomial(e))
        try:
            cols.append(basis.coordinates(image))
        except DegreeTooHigh as exc:
            raise NotPolynomialOnE(f"image of monomial {e} leaves the basis space: {exc}") from exc
    return GeneratorMatrix(basis, np.column_stack(cols))


def matrix_exp(A) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade order 13)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix_exp needs finite entries")
    out = scipy.linalg.expm(A)
    if not np.all(np.isfinite(out)):
        raise OverflowError("matrix exponential overflowed the floating-point range")
    return out


def _moment_setup(model, statespace, degree, p, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (statespace.dim,):
        raise ValueError(f"state must have shape ({statespace.dim},)")
    if not statespace.contains(x):
        raise PointOutsideStateSpace(f"point {x.tolist()} violates constraints beyond tolerance")
    basis = monomial_basis(statespace, degree)
    pvec = basis.coordinates(p)
    gm = generator_matrix(model, basis)
    return basis, gm, pvec, x


def conditional_moment(model: ModelCoefficients, statespace, degree: int, p: Polynomial, x, tau: float) -> float:
    """E[p(X_{t+tau}) | X_t = x] through the generator-matrix exponential."""
    if tau < 0.0:
        raise ValueError("tau must be >= 0")
    basis, gm, pvec, x = _moment_setup(model, statespace, degree, p, x)
    H = basis.evaluate(x)
    return float(H @ gm.propagator(tau) @ pvec)


def joint_moment(
    model: ModelCoefficients,
    statespace,
    degree: int,
    x,
    times: Sequence[float],
    exponents: Sequence[Iterable[int]],
) -> float:
    """E[prod_k X_{t_k}^{alpha_k} | X_0 = x] by backward iteration.

    Times must be nondecreasing and nonnegative; each iterated product must
    stay inside the degree bound or DegreeTooHigh is raised.
    """
    times = [float(t) for t in times]
    exps = [tuple(int(k) for k in e) for e in exponents]
    if len(times) != len(exps) or not times:
        raise ValueError("times and exponents must be equal-length and nonempty")
    if any(t < 0 for t in times) or any(t2 < t1 for t1, t2 in zip(times, times[1:])):
        raise ValueError("times must be nonnegative and nondecreasing")
    x = np.asarray(x, dtype=float)
    if not statespace.contains(x):
        raise PointOutsideStateSpace(f"point {x.tolist()} violates constraints beyond tolerance")
    basis = monomial_basis(statespace, degree)
    gm = generator_matrix(model, basis)
    v = basis.coordinates(Polynomial.monomial(exps[-1], dim=statespace.dim))
    for k in range(len(times) - 1, 0, -1):
        v = gm.propagator(times[k] - times[k - 1]) @ v
        carried = basis.polynomial(v) * Polynomial.monomial(exps[k - 1], dim=statespace.dim)
        v = basis.coordinates(carried)
    v = gm.propagator(times[0]) @ v
    return float(basis.evaluate(x) @ v)


def moment_by_ode(
    model: ModelCoefficients,
    statespace,
    degree: int,
    p: Polynomial,
    x,
    tau: float,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> float:
    """Independent moment evaluation: integrate dF/ds = G' F, F(0) = H(x),
    with step-doubling adaptive RK4, then return F(tau) . pvec."""
    if tau < 0.0:
        raise ValueError("tau must be >= 0")
    basis, gm, pvec, x = _moment_setup(model, statespace, degree, p, x)
    GT = gm.matrix.T
    y = basis.evaluate(x)
    if tau == 0.0:
        return float(y @ pvec)

    def rk4(yv, h):
        k1 = GT @ yv
        k2 = GT @ (yv + 0.5 * h * k1)
        k3 = GT @ (yv + 0.5 * h * k2)
        k4 = GT @ (yv + h * k3)
        return yv + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    t = 0.0
    h = tau / 16.0
    h_min = tau * 1e-13
    while t < tau:
        h = min(h, tau - t)
        if h < h_min:
            raise StepSizeUnderflow(f"step size {h} underflowed at t = {t}")
        full = rk4(y, h)
        half = rk4(rk4(y, 0.5 * h), 0.5 * h)
        scale = atol + rtol * np.maximum(np.abs(half), np.abs(y))
        err = np.max(np.abs(half - full) / scale) / 15.0
        if err <= 1.0:
            y = half + (half - full) / 15.0
            t += h
        factor = 0.9 * (1.0 / max(err, 1e-16)) ** 0.2
        h *= min(5.0, max(0.2, factor))
    return float(y @ pvec)
