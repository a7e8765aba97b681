import numpy as np
import pytest

from polydiff.generator import ModelCoefficients
from polydiff.polynomial import Polynomial
from polydiff.statespace import (
    BoxOrthant,
    BoxOrthantParams,
    FullSpace,
    Quadric,
    QuadricParams,
    Simplex,
    SimplexParams,
    assemble_model,
)


def _const(dim, c):
    return Polynomial.constant(dim, c)


def _var(i, dim):
    return Polynomial.variable(i, dim)


def brownian_model():
    space = FullSpace(1)
    model = ModelCoefficients([[_const(1, 1.0)]], [_const(1, 0.0)])
    return model, space


def ou_model():
    # dX = (0.3 - X) dt + sqrt(0.4) dW
    space = FullSpace(1)
    model = ModelCoefficients([[_const(1, 0.4)]], [_const(1, 0.3) - _var(0, 1)])
    return model, space


def cir_params(b0, beta, sigma2=1.0):
    return BoxOrthantParams(m=0, n=1, gamma=np.zeros(0), alpha=[[0.0]], phi=[sigma2],
                            psi=np.zeros((1, 0)), pi=[[0.0]], beta=[b0], B=[[beta]])


def cir_model(b0=0.5, beta=-0.5, sigma2=1.0):
    space = BoxOrthant(0, 1)
    return assemble_model(space, cir_params(b0, beta, sigma2)), space


def jacobi_params():
    return BoxOrthantParams(m=1, n=0, gamma=[1.0], alpha=np.zeros((0, 0)), phi=np.zeros(0),
                            psi=np.zeros((0, 1)), pi=np.zeros((0, 0)), beta=[0.5], B=[[-1.0]])


def jacobi_model():
    # dX = (1/2 - X) dt + sqrt(X(1-X)) dW on [0,1]
    space = BoxOrthant(1, 0)
    return assemble_model(space, jacobi_params()), space


def simplex_params():
    return SimplexParams(alpha=[[0.0, 1.0], [1.0, 0.0]], beta=[0.5, 0.5],
                         B=[[-1.5, 0.5], [0.5, -1.5]])


def simplex_jacobi_model():
    space = Simplex(2)
    return assemble_model(space, simplex_params()), space


def ball_params(dim=2):
    return QuadricParams(alpha=np.eye(dim), beta=np.zeros(dim), B=-np.eye(dim))


def unit_ball_model(dim=2):
    space = Quadric(np.eye(dim))
    return assemble_model(space, ball_params(dim)), space


MODEL_MATRIX = {
    "brownian": brownian_model,
    "ou": ou_model,
    "cir": cir_model,
    "jacobi": jacobi_model,
    "simplex_jacobi": simplex_jacobi_model,
    "unit_ball": unit_ball_model,
}

# an interior point of each state space, used as a conditioning point
MATRIX_POINTS = {
    "brownian": np.array([0.7]),
    "ou": np.array([0.4]),
    "cir": np.array([0.8]),
    "jacobi": np.array([0.2]),
    "simplex_jacobi": np.array([0.3, 0.7]),
    "unit_ball": np.array([0.3, -0.4]),
}


@pytest.fixture(scope="session", params=sorted(MODEL_MATRIX))
def matrix_case(request):
    model, space = MODEL_MATRIX[request.param]()
    return request.param, model, space, MATRIX_POINTS[request.param]


@pytest.fixture(scope="session")
def jacobi():
    return jacobi_model()


@pytest.fixture(scope="session")
def cir():
    return cir_model()


@pytest.fixture(scope="session")
def simplex_jacobi():
    return simplex_jacobi_model()


@pytest.fixture(scope="session")
def unit_ball():
    return unit_ball_model()
