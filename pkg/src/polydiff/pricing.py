"""Pricing on polynomial diffusion models.

A pricing model discounts with exp(-alpha t) p(X_t) for a polynomial p that
is positive on the state space; bond prices, short rates, and swaption
payoffs then reduce to moment formulas in the generator matrix.  Variance
swap rates integrate the propagated spot-variance polynomial in closed form,
and index options on a simplex model are priced by fitting the transformed
payoff with a Chebyshev polynomial and pushing it through the same moment
machinery.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev
from scipy.stats import norm

from .basis import CoordVector, DegreeTooHigh, monomial_basis
from .generator import (
    ModelCoefficients,
    PointOutsideStateSpace,
    generator_matrix,
    matrix_exp,
)
from .polynomial import Polynomial
from .simulate import simulate_paths
from .statespace import Simplex, SimplexParams, StateSpace, assemble_model

__all__ = [
    "InvalidStatePriceDensity",
    "PricingModel",
    "SimplexIndexModel",
    "LognormalIndexPricer",
    "TabulatedIndexPricer",
    "price_cashflow",
    "bond_price",
    "short_rate",
    "swaption_payoff_vector",
    "swaption_price_mc",
    "variance_swap_rate",
    "index_weights",
    "fit_index_payoff",
    "constituent_option_price",
]


class InvalidStatePriceDensity(ValueError):
    """The state-price density is nonpositive where it must divide."""


@dataclass
class PricingModel:
    """Model plus the discounting pair (alpha, p).

    Construction runs a sampled positivity check of p on the state space;
    a clear violation raises, values within margin of zero are only flagged
    (``positivity`` attribute) with a warning.
    """

    model: ModelCoefficients
    statespace: StateSpace
    degree: int
    p: Polynomial
    alpha: float = 0.0
    positivity: str = field(init=False, default="pass")

    def __post_init__(self):
        self.basis = monomial_basis(self.statespace, self.degree)
        self.gm = generator_matrix(self.model, self.basis)
        self.pvec = self.basis.coordinates(self.p)
        X = self.statespace.all_samples(1000)
        vals = np.asarray(self.p(X), dtype=float)
        low = float(vals.min())
        if low < -1e-9:
            raise InvalidStatePriceDensity(
                f"p is negative on the state space (sampled minimum {low:.6g})")
        if low <= 1e-9:
            # touches zero (e.g. a spot variance vanishing on the boundary)
            self.positivity = "inconclusive"
            warnings.warn(f"p comes within {low:.3g} of zero on sampled points; "
                          "density division may be unstable near the boundary")

    def _state(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.statespace.dim,):
            raise ValueError(f"state must have shape ({self.statespace.dim},)")
        if not self.statespace.contains(x):
            raise PointOutsideStateSpace(f"point {x.tolist()} violates constraints beyond tolerance")
        return x


def _denominator(pm: PricingModel, H: np.ndarray) -> float:
    denom = float(H @ pm.pvec)
    if denom <= 0.0:
        raise InvalidStatePriceDensity(f"state-price density H(x)'p = {denom:.6g} <= 0")
    return denom


def price_cashflow(pm: PricingModel, q: Polynomial, x, t: float, T: float) -> float:
    """Time-t price of the cashflow q(X_T):
    exp(-alpha (T-t)) H(x)' expm((T-t) G) (p q)vec / (H(x)' pvec)."""
    if T < t:
        raise ValueError("need T >= t")
    x = pm._state(x)
    pq = pm.basis.coordinates(pm.p * q)  # DegreeTooHigh if p*q leaves the space
    H = pm.basis.evaluate(x)
    denom = _denominator(pm, H)
    return math.exp(-pm.alpha * (T - t)) * float(H @ pm.gm.propagator(T - t) @ pq) / denom


def bond_price(pm: PricingModel, x, t: float, T: float) -> float:
    """Zero-coupon bond: the unit cashflow at T."""
    return price_cashflow(pm, Polynomial.one(pm.statespace.dim), x, t, T)


def short_rate(pm: PricingModel, x) -> float:
    """r = alpha - H(x)' G pvec / H(x)' pvec."""
    x = pm._state(x)
    H = pm.basis.evaluate(x)
    denom = _denominator(pm, H)
    return pm.alpha - float(H @ pm.gm.matrix @ pm.pvec) / denom


def swaption_payoff_vector(pm: PricingModel, coupons, T: float) -> CoordVector:
    """Coordinates of the swap value seen from exercise time T:
    w = sum_i c_i exp(-alpha T_i) expm((T_i - T) G) pvec."""
    w = np.zeros(len(pm.basis))
    for c_i, T_i in coupons:
        if T_i < T:
            raise ValueError("coupon dates must not precede the exercise date")
        w += float(c_i) * math.exp(-pm.alpha * T_i) * (pm.gm.propagator(T_i - T) @ pm.pvec)
    return CoordVector(pm.basis, w)


def swaption_price_mc(
    pm: PricingModel,
    coupons,
    expiry: float,
    x0,
    n_paths: int = 20000,
    seed: int = 0,
    dt: float = 1e-3,
) -> tuple[float, float]:
    """Monte Carlo swaption price E[(H(X_T)'w)^+] / (H(x0)'pvec), with its
    standard error.  The payoff vector w is exact; only X_T is simulated."""
    x0 = pm._state(x0)
    w = swaption_payoff_vector(pm, coupons, expiry).values
    # store only the endpoint; the payoff needs X_T alone
    paths = simulate_paths(pm.model, pm.statespace, x0, expiry, dt, n_paths, seed,
                           store_stride=max(int(round(expiry / dt)), 1))
    XT = paths.paths[:, -1, :]
    vals = np.maximum(pm.basis.evaluate(XT) @ w, 0.0)
    denom = _denominator(pm, pm.basis.evaluate(x0))
    price = float(vals.mean()) / denom
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) / denom
    return price, se


def _integral_propagator(G: np.ndarray, tau: float) -> np.ndarray:
    """int_0^tau expm(s G) ds via the block trick expm([[G, I], [0, 0]] tau)."""
    n = G.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = G
    M[:n, n:] = np.eye(n)
    return matrix_exp(tau * M)[:n, n:]


def variance_swap_rate(pm: PricingModel, x, t: float, T: float) -> float:
    """Annualized expected integrated spot variance: here pm.p is the spot
    variance polynomial and VS(t,T) = H(x)'(int_0^{T-t} expm(sG) ds) pvec / (T-t)."""
    if T <= t:
        raise ValueError("need T > t")
    x = pm._state(x)
    tau = T - t
    J = _integral_propagator(pm.gm.matrix, tau)
    return float(pm.basis.evaluate(x) @ J @ pm.pvec) / tau


# ---------------------------------------------------------------------------
# stock indices on the simplex
# ---------------------------------------------------------------------------


@dataclass
class LognormalIndexPricer:
    """Flat-volatility lognormal call prices C(T, K) for the index."""

    spot: float
    rate: float
    vol: float

    def __call__(self, T: float, K: float) -> float:
        if T <= 0.0:
            return max(self.spot - K, 0.0)
        if K <= 0.0:
            return self.spot - K * math.exp(-self.rate * T)
        sig = self.vol * math.sqrt(T)
        fwd = self.spot * math.exp(self.rate * T)
        d1 = (math.log(fwd / K) + 0.5 * sig * sig) / sig
        d2 = d1 - sig
        return math.exp(-self.rate * T) * (fwd * norm.cdf(d1) - K * norm.cdf(d2))


class TabulatedIndexPricer:
    """Index call prices interpolated in strike from a table (monotone cubic)."""

    def __init__(self, strikes, prices):
        from scipy.interpolate import PchipInterpolator

        strikes = np.asarray(strikes, dtype=float)
        prices = np.asarray(prices, dtype=float)
        if strikes.ndim != 1 or strikes.shape != prices.shape or len(strikes) < 2:
            raise ValueError("need matching 1-d strike and price tables with at least 2 points")
        if np.any(np.diff(strikes) <= 0.0):
            raise ValueError("strikes must be strictly increasing")
        self._interp = PchipInterpolator(strikes, prices, extrapolate=True)

    def __call__(self, T: float, K: float) -> float:
        return float(self._interp(K))


@dataclass
class SimplexIndexModel:
    """Simplex diffusion whose coordinates are discounted constituent weights.

    The index weights at time t are Y_t = Phi(T*-t) + Psi(T*-t) X_t with
    Phi(tau) = int_0^tau expm(sB) beta ds and Psi(tau) = expm(tau B); they sum
    to one because the drift is tangent to the mass constraint.
    """

    params: SimplexParams
    T_star: float
    degree: int
    pricer: object = None  # default callable (T, K) -> index call price

    def __post_init__(self):
        self.statespace = Simplex(self.params.dim)
        self.model = assemble_model(self.statespace, self.params)
        self.basis = monomial_basis(self.statespace, self.degree)
        self.gm = generator_matrix(self.model, self.basis)
        from .conditions import validate_params

        report = validate_params(self.statespace, self.params)
        if report.verdict != "Valid":
            warnings.warn(f"simplex parameters are {report.verdict}: {report.failed_ids()}")

    @property
    def dim(self) -> int:
        return self.params.dim


def index_weights(sim: SimplexIndexModel, x, t: float) -> np.ndarray:
    """Y_t given X_t = x."""
    if not 0.0 <= t <= sim.T_star:
        raise ValueError("need 0 <= t <= T*")
    x = np.asarray(x, dtype=float)
    if x.shape != (sim.dim,):
        raise ValueError(f"state must have shape ({sim.dim},)")
    tau = sim.T_star - t
    d = sim.dim
    M = np.zeros((d + 1, d + 1))
    M[:d, :d] = sim.params.B
    M[:d, d] = sim.params.beta
    E = matrix_exp(tau * M)
    Psi = E[:d, :d]
    Phi = E[:d, d]
    return Phi + Psi @ x


def fit_index_payoff(
    sim: SimplexIndexModel,
    index_pricer,
    constituent: int,
    T: float,
    K: float,
    grid_size: int = 256,
    cheb_degree: int | None = None,
    eps: float = 1e-6,
) -> tuple[Polynomial, float]:
    """Chebyshev fit of g(xi) = xi C(T, K/xi) on [eps, 1], composed with the
    affine map x -> Y^i_T(x).  Returns the payoff polynomial in the simplex
    coordinates and the max abs fit residual on a dense reference grid."""
    if index_pricer is None:
        index_pricer = sim.pricer
    if not 0 <= constituent < sim.dim:
        raise ValueError("constituent index out of range")
    if not 0.0 <= T <= sim.T_star:
        raise ValueError("need 0 <= T <= T*")
    if cheb_degree is None:
        cheb_degree = min(sim.degree, 10)
    if cheb_degree < 1:
        raise ValueError("cheb_degree must be >= 1")
    if cheb_degree > sim.degree:
        raise DegreeTooHigh(f"Chebyshev degree {cheb_degree} exceeds the basis degree {sim.degree}")
    if grid_size <= cheb_degree:
        raise ValueError("grid_size must exceed cheb_degree")
    if K <= 0.0:
        raise ValueError("need K > 0")

    def g(xi):
        return np.array([x * index_pricer(T, K / x) for x in np.atleast_1d(xi)])

    # least-squares fit at mapped Chebyshev nodes, residual on a uniform grid
    nodes = np.cos(np.pi * (2 * np.arange(grid_size) + 1) / (2 * grid_size))
    xs_fit = eps + (1.0 - eps) * (nodes + 1.0) / 2.0
    fit = chebyshev.Chebyshev.fit(xs_fit, g(xs_fit), deg=cheb_degree, domain=[eps, 1.0])
    xs_ref = np.linspace(eps, 1.0, max(512, 2 * grid_size))
    residual = float(np.abs(fit(xs_ref) - g(xs_ref)).max())

    # compose with the affine weight map: xi(x) = Phi_i + (Psi x)_i
    d = sim.dim
    M = np.zeros((d + 1, d + 1))
    M[:d, :d] = sim.params.B
    M[:d, d] = sim.params.beta
    E = matrix_exp((sim.T_star - T) * M)
    affine = Polynomial.constant(d, E[constituent, d])
    for j in range(d):
        if E[constituent, j] != 0.0:
            affine = affine + E[constituent, j] * Polynomial.variable(j, d)
    # rescale to the Chebyshev variable on [-1, 1] and expand in powers
    a, b = fit.domain
    t_poly = (2.0 * affine - (a + b)) * (1.0 / (b - a))
    coeffs = chebyshev.cheb2poly(fit.coef)
    payoff = Polynomial.zero(d)
    power = Polynomial.one(d)
    for c in coeffs:
        payoff = payoff + float(c) * power
        power = power * t_poly
    return payoff, residual


def constituent_option_price(
    sim: SimplexIndexModel,
    index_pricer,
    constituent: int,
    T: float,
    K: float,
    x0,
    grid_size: int = 256,
    cheb_degree: int | None = None,
    residual_warn: float = 1e-4,
) -> float:
    """Price E[Y^i_T C(T, K / Y^i_T)] by the moment formula applied to the
    Chebyshev payoff surrogate.  Warns when the fit residual is large; use
    fit_index_payoff directly for the residual diagnostics."""
    x0 = np.asarray(x0, dtype=float)
    if not sim.statespace.contains(x0):
        raise PointOutsideStateSpace(f"x0 = {x0.tolist()} violates constraints beyond tolerance")
    payoff, residual = fit_index_payoff(sim, index_pricer, constituent, T, K,
                                        grid_size=grid_size, cheb_degree=cheb_degree)
    if residual > residual_warn:
        warnings.warn(f"Chebyshev payoff fit residual {residual:.3g} exceeds {residual_warn:.1g}")
    vec = sim.basis.coordinates(payoff)
    H = sim.basis.evaluate(x0)
    return float(H @ sim.gm.propagator(T) @ vec)
