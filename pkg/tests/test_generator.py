"""Generator matrices, matrix exponentials, and conditional moments."""

import numpy as np
import pytest

from polydiff import (
    BoxOrthant,
    FullSpace,
    ModelCoefficients,
    NotPolynomialOnE,
    PointOutsideStateSpace,
    Polynomial,
    Simplex,
    conditional_moment,
    generator_matrix,
    joint_moment,
    matrix_exp,
    moment_by_ode,
    monomial_basis,
)
from polydiff.generator import apply_generator

from conftest import MODEL_MATRIX, MATRIX_POINTS, brownian_model, cir_model, jacobi_model, ou_model


class TestApplyGenerator:
    def test_constant_killed(self):
        model, space = brownian_model()
        assert apply_generator(model, Polynomial.constant(1, 5.0)).is_zero()

    def test_brownian_square(self):
        # a = 1, b = 0: G x^2 = 1
        model, space = brownian_model()
        assert apply_generator(model, Polynomial.monomial((2,))) == Polynomial.one(1)

    def test_jacobi_linear(self):
        # G x = b = 1/2 - x
        model, space = jacobi_model()
        got = apply_generator(model, Polynomial.variable(0, 1))
        assert got == Polynomial.constant(1, 0.5) - Polynomial.variable(0, 1)


class TestGeneratorMatrix:
    def test_jacobi_degree_one(self):
        model, space = jacobi_model()
        gm = generator_matrix(model, monomial_basis(space, 1))
        assert np.allclose(gm.matrix, [[0.0, 0.5], [0.0, -1.0]])

    def test_brownian_degree_two(self):
        model, space = brownian_model()
        gm = generator_matrix(model, monomial_basis(space, 2))
        expect = np.zeros((3, 3))
        expect[0, 2] = 1.0  # G x^2 = 1
        assert np.allclose(gm.matrix, expect)

    def test_constant_column_zero(self):
        for name in sorted(MODEL_MATRIX):
            model, space = MODEL_MATRIX[name]()
            gm = generator_matrix(model, monomial_basis(space, 3))
            assert np.all(gm.matrix[:, 0] == 0.0)

    def test_graded_block_structure(self):
        # the generator never raises degree, so entries below a column's
        # degree block vanish
        for name in sorted(MODEL_MATRIX):
            model, space = MODEL_MATRIX[name]()
            basis = monomial_basis(space, 4)
            gm = generator_matrix(model, basis)
            degs = [sum(e) for e in basis.monomials]
            for i in range(len(basis)):
                for j in range(len(basis)):
                    if degs[i] > degs[j]:
                        assert gm.matrix[i, j] == 0.0

    def test_rejects_non_invariant_diffusion(self):
        # identity diffusion pushes mass off the simplex hyperplane
        space = Simplex(2)
        one = Polynomial.one(2)
        zero = Polynomial.zero(2)
        model = ModelCoefficients([[one, zero], [zero, one]], [zero, zero])
        with pytest.raises(NotPolynomialOnE):
            generator_matrix(model, monomial_basis(space, 2))

    def test_csv_round_trip(self):
        model, space = jacobi_model()
        gm = generator_matrix(model, monomial_basis(space, 2))
        lines = gm.csv_text().strip().split("\n")
        assert len(lines) == 4
        got = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        assert np.array_equal(got, gm.matrix)


class TestMatrixExp:
    def test_identity_at_zero(self):
        assert np.array_equal(matrix_exp(np.zeros((4, 4))), np.eye(4))

    def test_nilpotent(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(matrix_exp(A), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)

    def test_diagonal(self):
        A = np.diag([1.0, -2.0, 0.5])
        assert np.allclose(matrix_exp(A), np.diag(np.exp([1.0, -2.0, 0.5])), rtol=1e-14)

    def test_taylor_oracle_small_norm(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            A = rng.standard_normal((6, 6))
            A *= 0.5 / np.linalg.norm(A, 2)
            series = np.eye(6)
            term = np.eye(6)
            for k in range(1, 30):
                term = term @ A / k
                series = series + term
            assert np.max(np.abs(matrix_exp(A) - series)) < 1e-12

    def test_input_validation(self):
        with pytest.raises(ValueError):
            matrix_exp(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            matrix_exp(np.array([[np.nan, 0.0], [0.0, 0.0]]))


class TestSemigroup:
    @pytest.mark.parametrize("name", sorted(MODEL_MATRIX))
    def test_propagator_semigroup(self, name):
        model, space = MODEL_MATRIX[name]()
        gm = generator_matrix(model, monomial_basis(space, 4))
        for s in (0.1, 0.5, 1.0):
            for t in (0.1, 0.5, 1.0):
                lhs = gm.propagator(s + t)
                rhs = gm.propagator(s) @ gm.propagator(t)
                scale = max(np.linalg.norm(lhs), 1.0)
                assert np.linalg.norm(lhs - rhs) / scale < 1e-8

    def test_propagator_zero_is_identity(self):
        model, space = ou_model()
        gm = generator_matrix(model, monomial_basis(space, 3))
        assert np.array_equal(gm.propagator(0.0), np.eye(len(gm.basis)))


class TestConditionalMoment:
    def test_brownian_variance(self):
        model, space = brownian_model()
        p = Polynomial.monomial((2,))
        for x in (0.0, 0.7, -1.3):
            for tau in (0.1, 1.0, 2.5):
                got = conditional_moment(model, space, 2, p, [x], tau)
                assert got == pytest.approx(x * x + tau, rel=1e-12)

    def test_tau_zero_returns_p(self):
        for name in sorted(MODEL_MATRIX):
            model, space = MODEL_MATRIX[name]()
            x = MATRIX_POINTS[name]
            p = Polynomial.variable(0, space.dim) ** 2
            got = conditional_moment(model, space, 4, p, x, 0.0)
            assert got == pytest.approx(p(x), abs=1e-12)

    def test_ou_mean_closed_form(self):
        # b = 0.3 - x reverts to 0.3 at unit rate
        model, space = ou_model()
        p = Polynomial.variable(0, 1)
        for tau in (0.1, 1.0, 3.0):
            got = conditional_moment(model, space, 1, p, [0.4], tau)
            assert got == pytest.approx(0.3 + (0.4 - 0.3) * np.exp(-tau), rel=1e-12)

    def test_cir_mean_closed_form(self):
        b0, beta = 0.5, -0.5
        model, space = cir_model(b0, beta)
        p = Polynomial.variable(0, 1)
        x = 0.8
        for tau in (0.2, 1.0):
            mean = -b0 / beta + (x + b0 / beta) * np.exp(beta * tau)
            got = conditional_moment(model, space, 1, p, [x], tau)
            assert got == pytest.approx(mean, rel=1e-12)

    def test_moment_of_one_is_one(self):
        for name in sorted(MODEL_MATRIX):
            model, space = MODEL_MATRIX[name]()
            x = MATRIX_POINTS[name]
            got = conditional_moment(model, space, 3, Polynomial.one(space.dim), x, 1.7)
            assert abs(got - 1.0) < 1e-12

    def test_point_outside_rejected(self):
        model, space = jacobi_model()
        with pytest.raises(PointOutsideStateSpace):
            conditional_moment(model, space, 2, Polynomial.one(1), [1.5], 1.0)

    def test_negative_tau_rejected(self):
        model, space = brownian_model()
        with pytest.raises(ValueError):
            conditional_moment(model, space, 2, Polynomial.one(1), [0.0], -0.1)


class TestJointMoment:
    def test_single_time_reduces_to_conditional(self):
        model, space = jacobi_model()
        got = joint_moment(model, space, 3, [0.2], [0.8], [(2,)])
        want = conditional_moment(model, space, 3, Polynomial.monomial((2,)), [0.2], 0.8)
        assert got == pytest.approx(want, rel=1e-12)

    def test_brownian_covariance(self):
        # E[X_s X_t | X_0 = x] = x^2 + min(s, t)
        model, space = brownian_model()
        x = 0.7
        got = joint_moment(model, space, 2, [x], [0.5, 1.25], [(1,), (1,)])
        assert got == pytest.approx(x * x + 0.5, rel=1e-11)

    def test_three_times(self):
        # E[X_r X_s X_t] for Brownian motion from x:
        # x^3 + x (min(r,s) + min(r,t) + min(s,t))
        model, space = brownian_model()
        x = 0.4
        r, s, t = 0.3, 0.7, 1.1
        got = joint_moment(model, space, 3, [x], [r, s, t], [(1,), (1,), (1,)])
        want = x**3 + x * (r + r + s)
        assert got == pytest.approx(want, rel=1e-11)

    def test_decreasing_times_rejected(self):
        model, space = brownian_model()
        with pytest.raises(ValueError):
            joint_moment(model, space, 2, [0.0], [1.0, 0.5], [(1,), (1,)])

    def test_mismatched_lengths_rejected(self):
        model, space = brownian_model()
        with pytest.raises(ValueError):
            joint_moment(model, space, 2, [0.0], [1.0], [(1,), (1,)])


class TestOdeOracle:
    @pytest.mark.parametrize("name", sorted(MODEL_MATRIX))
    def test_matches_matrix_exponential(self, name):
        model, space = MODEL_MATRIX[name]()
        x = MATRIX_POINTS[name]
        p = Polynomial.variable(0, space.dim) ** 2
        a = conditional_moment(model, space, 4, p, x, 1.3)
        b = moment_by_ode(model, space, 4, p, x, 1.3)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-10)

    def test_tau_zero(self):
        model, space = ou_model()
        p = Polynomial.variable(0, 1)
        assert moment_by_ode(model, space, 2, p, [0.4], 0.0) == pytest.approx(0.4)
