"""State spaces: membership, projection, samplers, and family assembly."""

import numpy as np
import pytest

from polydiff import (
    BoxOrthant,
    BoxOrthantParams,
    FullSpace,
    ModelCoefficients,
    Polynomial,
    Quadric,
    QuadricParams,
    Simplex,
    SimplexParams,
    assemble_model,
)
from polydiff.statespace import skew_symmetric_basis

ALL_SPACES = [
    FullSpace(1),
    FullSpace(3),
    Quadric(np.eye(2)),
    Quadric(np.diag([1.0, -1.0]), orientation="outside"),
    Quadric(np.diag([1.0, 1.0, -1.0])),
    BoxOrthant(1, 0),
    BoxOrthant(0, 1),
    BoxOrthant(2, 1),
    Simplex(2),
    Simplex(4),
]


class TestConstruction:
    def test_full_space_needs_positive_dim(self):
        with pytest.raises(ValueError):
            FullSpace(0)

    def test_quadric_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            Quadric([[2.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            Quadric([[1.0, 0.5], [0.5, 1.0]])
        with pytest.raises(ValueError):
            Quadric(-np.eye(2))  # empty level set
        with pytest.raises(ValueError):
            Quadric(np.eye(2), orientation="sideways")

    def test_box_orthant_needs_a_coordinate(self):
        with pytest.raises(ValueError):
            BoxOrthant(0, 0)

    def test_simplex_needs_dim_two(self):
        with pytest.raises(ValueError):
            Simplex(1)

    def test_inequality_counts(self):
        assert len(Quadric(np.eye(3)).inequalities) == 1
        assert len(BoxOrthant(2, 1).inequalities) == 5
        assert len(Simplex(3).inequalities) == 3
        assert len(Simplex(3).equalities) == 1
        assert FullSpace(2).inequalities == ()


class TestMembership:
    def test_unit_ball(self):
        ball = Quadric(np.eye(2))
        assert ball.contains([0.6, 0.8])
        assert ball.contains([0.0, 0.0])
        assert not ball.contains([0.8, 0.8])
        assert ball.violation([2.0, 0.0]) == pytest.approx(3.0)

    def test_outside_orientation(self):
        shell = Quadric(np.eye(2), orientation="outside")
        assert shell.contains([2.0, 0.0])
        assert not shell.contains([0.5, 0.0])

    def test_box_orthant(self):
        space = BoxOrthant(1, 1)
        assert space.contains([0.5, 3.0])
        assert not space.contains([1.5, 3.0])
        assert not space.contains([0.5, -0.1])

    def test_simplex_equality_binds(self):
        space = Simplex(3)
        assert space.contains([0.2, 0.3, 0.5])
        assert not space.contains([0.2, 0.3, 0.6])
        assert not space.contains([-0.1, 0.6, 0.5])

    def test_batched(self):
        ball = Quadric(np.eye(2))
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        assert ball.contains(X).tolist() == [True, False]


class TestProjection:
    @pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: repr(s))
    def test_lands_inside_and_idempotent(self, space):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((200, space.dim)) * 3.0
        P = space.project(X)
        assert np.all(space.contains(P))
        assert np.allclose(space.project(P), P, atol=1e-12)

    @pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: repr(s))
    def test_fixes_members(self, space):
        X = space.interior_samples(50)
        assert np.allclose(space.project(X), X, atol=1e-12)

    def test_simplex_known_point(self):
        space = Simplex(2)
        assert np.allclose(space.project([0.4, 0.8]), [0.3, 0.7])
        assert np.allclose(space.project([-1.0, 0.2]), [0.0, 1.0])

    def test_ball_is_radial(self):
        ball = Quadric(np.eye(3))
        x = np.array([3.0, 0.0, 4.0])
        assert np.allclose(ball.project(x), x / 5.0)

    def test_outside_quadric_near_cone(self):
        # radial scaling is undefined where x'Qx <= 0; the projection must
        # still land on the space
        shell = Quadric(np.diag([1.0, -1.0]), orientation="outside")
        for x in ([0.0, 0.0], [0.1, 0.1], [0.3, 0.9]):
            p = shell.project(np.array(x))
            assert shell.contains(p)


class TestSamplers:
    @pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: repr(s))
    def test_interior_contained(self, space):
        X = space.interior_samples(100)
        assert X.shape == (100, space.dim)
        assert np.all(space.contains(X))

    @pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: repr(s))
    def test_boundary_on_stratum(self, space):
        for k, g in enumerate(space.inequalities):
            X = space.boundary_samples(k, 60)
            assert np.all(space.contains(X, tol=1e-9))
            vals = np.array([g(x) for x in X])
            assert np.max(np.abs(vals)) < 1e-9

    @pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: repr(s))
    def test_deterministic(self, space):
        assert np.array_equal(space.interior_samples(40), space.interior_samples(40))
        assert np.array_equal(space.all_samples(64), space.all_samples(64))

    def test_bad_stratum_index(self):
        with pytest.raises(IndexError):
            Quadric(np.eye(2)).boundary_samples(1, 10)
        with pytest.raises(IndexError):
            FullSpace(2).boundary_samples(0, 10)

    def test_compactness_flags(self):
        assert Quadric(np.eye(2)).is_compact
        assert not Quadric(np.diag([1.0, -1.0])).is_compact
        assert not Quadric(np.eye(2), orientation="outside").is_compact
        assert BoxOrthant(2, 0).is_compact
        assert not BoxOrthant(2, 1).is_compact
        assert Simplex(3).is_compact
        assert not FullSpace(1).is_compact


class TestSimplexReduce:
    def test_eliminates_last_coordinate(self):
        space = Simplex(3)
        p = Polynomial.variable(2, 3) ** 2 * Polynomial.variable(0, 3)
        q = space.reduce(p)
        assert all(e[2] == 0 for e in q.terms)

    def test_agrees_on_the_space(self):
        space = Simplex(3)
        rng = np.random.default_rng(5)
        p = Polynomial.monomial((1, 1, 2), 2.5) + Polynomial.monomial((0, 0, 3), -1.0)
        q = space.reduce(p)
        X = rng.dirichlet(np.ones(3), 50)
        for x in X:
            assert p(x) == pytest.approx(q(x), rel=1e-12, abs=1e-12)


class TestSkewBasis:
    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_count_and_antisymmetry(self, d):
        S = skew_symmetric_basis(d)
        assert len(S) == d * (d - 1) // 2
        for M in S:
            assert np.array_equal(M, -M.T)
            assert np.sum(np.abs(M)) == 2.0


class TestAssembly:
    def test_simplex_two_assets(self):
        space = Simplex(2)
        params = SimplexParams(alpha=[[0.0, 1.0], [1.0, 0.0]], beta=[0.1, 0.2], B=np.zeros((2, 2)))
        model = assemble_model(space, params)
        x1x2 = Polynomial.monomial((1, 1), 1.0)
        assert model.a[0][0] == x1x2
        assert model.a[1][1] == x1x2
        assert model.a[0][1] == -1.0 * x1x2
        assert model.a[1][0] == -1.0 * x1x2

    def test_simplex_rows_sum_to_zero(self):
        space = Simplex(3)
        rng = np.random.default_rng(2)
        alpha = np.abs(rng.standard_normal((3, 3)))
        alpha = alpha + alpha.T
        np.fill_diagonal(alpha, 0.0)
        model = assemble_model(space, SimplexParams(alpha=alpha, beta=np.zeros(3), B=np.zeros((3, 3))))
        for i in range(3):
            row = sum((model.a[i][j] for j in range(3)), Polynomial.zero(3))
            assert row.is_zero()

    def test_box_orthant_structure(self):
        space = BoxOrthant(1, 1)
        params = BoxOrthantParams(
            m=1, n=1,
            gamma=[2.0], alpha=[[0.5]], phi=[1.0], psi=[[3.0]], pi=[[0.0]],
            beta=[0.0, 0.25], B=np.zeros((2, 2)),
        )
        model = assemble_model(space, params)
        x1 = Polynomial.variable(0, 2)
        x2 = Polynomial.variable(1, 2)
        assert model.a[0][0] == 2.0 * x1 * (Polynomial.one(2) - x1)
        assert model.a[1][1] == 0.5 * x2 * x2 + x2 * (Polynomial.one(2) + 3.0 * x1)
        assert model.a[0][1].is_zero()
        assert model.b[1] == Polynomial.constant(2, 0.25)

    def test_quadric_plain(self):
        space = Quadric(np.eye(2))
        params = QuadricParams(alpha=np.eye(2), beta=np.zeros(2), B=-np.eye(2))
        model = assemble_model(space, params)
        shell = space.inequalities[0]
        assert model.a[0][0] == shell
        assert model.a[0][1].is_zero()
        assert model.b[0] == -1.0 * Polynomial.variable(0, 2)

    def test_quadric_tangential_term(self):
        # on the boundary circle the alpha part vanishes and the remainder is
        # the rank-one tangential field g (x2, -x1)(x2, -x1)'
        g = 0.7
        space = Quadric(np.eye(2))
        params = QuadricParams(alpha=np.eye(2), beta=np.zeros(2), B=-np.eye(2), gamma=[[g]])
        model = assemble_model(space, params)
        for theta in np.linspace(0.0, 6.0, 13):
            x = np.array([np.cos(theta), np.sin(theta)])
            A = np.array([[model.a[i][j](x) for j in range(2)] for i in range(2)])
            t = np.array([x[1], -x[0]])
            assert np.allclose(A, g * np.outer(t, t), atol=1e-12)

    def test_full_space_passthrough(self):
        space = FullSpace(1)
        raw = ModelCoefficients([[Polynomial.one(1)]], [Polynomial.zero(1)])
        assert assemble_model(space, raw) is raw

    def test_family_mismatch(self):
        with pytest.raises(ValueError):
            assemble_model(Simplex(2), QuadricParams(alpha=np.eye(2), beta=np.zeros(2), B=np.zeros((2, 2))))
        with pytest.raises(ValueError):
            assemble_model(BoxOrthant(1, 0), SimplexParams(alpha=np.zeros((1, 1)), beta=[0.0], B=[[0.0]]))

    def test_structural_rejections(self):
        space = BoxOrthant(0, 2)
        base = dict(m=0, n=2, gamma=[], phi=[0.0, 0.0], psi=np.zeros((2, 0)),
                    beta=[0.1, 0.1], B=np.zeros((2, 2)))
        with pytest.raises(ValueError, match="pi"):
            assemble_model(space, BoxOrthantParams(alpha=np.zeros((2, 2)), pi=[[1.0, 0.0], [0.0, 0.0]], **base))
        with pytest.raises(ValueError, match="pi"):
            assemble_model(space, BoxOrthantParams(alpha=np.zeros((2, 2)), pi=[[0.0, -1.0], [-1.0, 0.0]], **base))
        box = BoxOrthant(1, 0)
        with pytest.raises(ValueError, match="gamma"):
            assemble_model(box, BoxOrthantParams(
                m=1, n=0, gamma=[-1.0], alpha=[], phi=[], psi=np.zeros((0, 1)), pi=[],
                beta=[0.5], B=[[-1.0]]))


class TestParamValidation:
    def test_shape_errors(self):
        with pytest.raises(ValueError, match="shape"):
            QuadricParams(alpha=np.eye(3), beta=np.zeros(2), B=np.zeros((2, 2)))
        with pytest.raises(ValueError, match="psi"):
            BoxOrthantParams(m=1, n=1, gamma=[1.0], alpha=[[1.0]], phi=[0.0],
                             psi=np.zeros((2, 2)), pi=[[0.0]], beta=np.zeros(2), B=np.zeros((2, 2)))

    def test_symmetry_enforced(self):
        with pytest.raises(ValueError, match="symmetric"):
            QuadricParams(alpha=[[1.0, 0.5], [0.0, 1.0]], beta=np.zeros(2), B=np.zeros((2, 2)))
        with pytest.raises(ValueError, match="symmetric"):
            SimplexParams(alpha=[[0.0, 1.0], [2.0, 0.0]], beta=np.zeros(2), B=np.zeros((2, 2)))

    def test_empty_blocks_accepted(self):
        # JSON specs write [] for zero-size blocks regardless of shape
        p = BoxOrthantParams(m=0, n=1, gamma=[], alpha=[[2.0]], phi=[1.0],
                             psi=[], pi=[[0.0]], beta=[0.3], B=[[-0.5]])
        assert p.psi.shape == (1, 0)
        assert p.gamma.shape == (0,)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            SimplexParams(alpha=[[0.0, np.inf], [np.inf, 0.0]], beta=np.zeros(2), B=np.zeros((2, 2)))

    def test_spec_dicts(self):
        assert Quadric(np.eye(2)).spec_dict() == {"family": "quadric", "Q": [1.0, 1.0], "orientation": "inside"}
        assert BoxOrthant(2, 1).spec_dict() == {"family": "box_orthant", "m": 2, "n": 1}
        assert Simplex(3).spec_dict() == {"family": "simplex", "dim": 3}
        assert FullSpace(4).spec_dict() == {"family": "full", "dim": 4}
