"""Projection operators: frozen oracle values, invariants, cross-checks."""

import numpy as np
import pytest

from mirrorbench.errors import ConvergenceError, DomainError
from mirrorbench.geometry import (Domain, bregman_project_numeric,
                                  bregman_projector, project_ball_l2,
                                  project_simplex_entropic,
                                  project_simplex_euclidean)
from mirrorbench.regularizers import (Hypentropy, NegEntropy, Quadratic,
                                      bregman_divergence)


def simplex_projection_bisection(y):
    """Independent oracle: solve sum(max(y + lam, 0)) = 1 by bisection."""
    y = np.asarray(y, dtype=float)
    lo, hi = -y.max() - 1.0, -y.max() + 1.0
    while np.maximum(y + hi, 0.0).sum() < 1.0:
        hi += 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(y + mid, 0.0).sum() < 1.0:
            lo = mid
        else:
            hi = mid
    return np.maximum(y + 0.5 * (lo + hi), 0.0)


class TestSimplexEuclidean:
    def test_feasible_point_unchanged(self):
        np.testing.assert_allclose(project_simplex_euclidean([0.5, 0.5]), [0.5, 0.5])

    def test_outside_vertex(self):
        # brute-force grid minimization of ||x - (2,0)||^2 over Delta(2)
        # (x = (q, 1-q), q in [0,1]) puts the optimum at q = 1, i.e. (1, 0)
        q = np.linspace(0.0, 1.0, 1_000_001)
        obj = (q - 2.0) ** 2 + (1.0 - q) ** 2
        assert q[obj.argmin()] == 1.0
        np.testing.assert_allclose(project_simplex_euclidean([2.0, 0.0]), [1.0, 0.0],
                                   atol=1e-12)

    def test_constant_vector_symmetry(self):
        for c in (-3.0, 0.0, 7.5):
            np.testing.assert_allclose(project_simplex_euclidean([c, c, c]),
                                       np.full(3, 1.0 / 3.0), atol=1e-12)

    def test_empty_input_rejected(self):
        with pytest.raises(DomainError):
            project_simplex_euclidean([])

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            project_simplex_euclidean([np.nan, 0.0])

    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            d = rng.integers(1, 6)
            y = rng.normal(0, 3, size=d)
            x = project_simplex_euclidean(y)
            x_oracle = simplex_projection_bisection(y)
            # objective-value agreement with the independent oracle
            assert float(((x - y) ** 2).sum()) <= float(((x_oracle - y) ** 2).sum()) + 1e-8
            assert abs(x.sum() - 1.0) < 1e-12
            assert np.all(x >= 0.0)

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = project_simplex_euclidean(rng.normal(0, 2, size=8))
            np.testing.assert_allclose(project_simplex_euclidean(x), x, atol=1e-12)

    def test_nonexpansive(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a, b = rng.normal(0, 3, size=(2, 6))
            pa, pb = project_simplex_euclidean(a), project_simplex_euclidean(b)
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12


class TestBallProjection:
    def test_inside_unchanged(self):
        y = np.array([0.1, -0.2, 0.3])
        np.testing.assert_allclose(project_ball_l2(y, np.zeros(3), 1.0), y)

    def test_radial_rescaling(self):
        np.testing.assert_allclose(project_ball_l2([3.0, 4.0], np.zeros(2), 1.0),
                                   [0.6, 0.8], atol=1e-15)

    def test_center_fixed(self):
        c = np.array([1.0, 2.0])
        np.testing.assert_allclose(project_ball_l2(c, c, 0.5), c)

    def test_idempotent_and_nonexpansive(self):
        rng = np.random.default_rng(3)
        c = rng.normal(size=4)
        for _ in range(100):
            a, b = rng.normal(0, 3, size=(2, 4))
            pa = project_ball_l2(a, c, 1.3)
            np.testing.assert_allclose(project_ball_l2(pa, c, 1.3), pa, atol=1e-12)
            pb = project_ball_l2(b, c, 1.3)
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12


class TestEntropicProjection:
    def test_uniform(self):
        np.testing.assert_allclose(project_simplex_entropic(np.ones(4)),
                                   np.full(4, 0.25))

    def test_normalization(self):
        np.testing.assert_allclose(project_simplex_entropic([2.0, 6.0]), [0.25, 0.75])

    def test_already_normalized(self):
        y = np.array([0.1, 0.3, 0.6])
        np.testing.assert_allclose(project_simplex_entropic(y), y)

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            project_simplex_entropic([1.0, 0.0])
        with pytest.raises(DomainError):
            project_simplex_entropic([1.0, -0.5])

    def test_preserves_ratios(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            y = rng.uniform(0.1, 5.0, size=6)
            x = project_simplex_entropic(y)
            np.testing.assert_allclose(x[1:] / x[0], y[1:] / y[0], rtol=1e-12)
            assert abs(x.sum() - 1.0) < 1e-12


class TestNumericBregman:
    def test_feasible_point_is_fixed(self):
        dom = Domain.l2_ball(3)
        y = np.array([0.2, 0.1, -0.3])
        np.testing.assert_allclose(
            bregman_project_numeric(Quadratic(), y, dom, 1e-10), y)

    def test_quadratic_matches_closed_form_ball(self):
        dom = Domain.l2_ball(4)
        rng = np.random.default_rng(5)
        for _ in range(25):
            y = rng.normal(0, 2, size=4)
            got = bregman_project_numeric(Quadratic(), y, dom, 1e-10)
            want = project_ball_l2(y, dom.center, dom.radius)
            np.testing.assert_allclose(got, want, atol=1e-6)

    def test_entropy_ball_matches_grid(self):
        # 2-D exhaustive grid oracle over the unit disk (vectorized divergence)
        reg = NegEntropy(signed=True)
        dom = Domain.l2_ball(2)
        y = np.array([1.5, 0.8])
        got = bregman_project_numeric(reg, y, dom, 1e-12)
        g = np.linspace(-1.0, 1.0, 1501)
        xx, yy = np.meshgrid(g, g, indexing="ij")
        mask = xx ** 2 + yy ** 2 <= 1.0
        pts = np.stack([xx[mask], yy[mask]], axis=1)
        a = np.abs(pts)
        phi = np.sum(np.where(a > 0, a * np.log(np.maximum(a, 1e-300)), 0.0), axis=1)
        vals = phi - reg.value(y) - (pts - y) @ reg.mirror_map(y)
        best = pts[vals.argmin()]
        np.testing.assert_allclose(got, best, atol=1e-3)
        assert bregman_divergence(reg, got, y) <= vals.min() + 1e-4

    def test_bad_tolerance_rejected(self):
        with pytest.raises(DomainError):
            bregman_project_numeric(Quadratic(), [2.0, 0.0], Domain.l2_ball(2), -1.0)

    def test_nonconvergence_raises_with_residual(self):
        with pytest.raises(ConvergenceError) as err:
            bregman_project_numeric(Quadratic(), np.full(3, 100.0),
                                    Domain.l2_ball(3), 1e-10, max_iter=1)
        assert err.value.residual > 0


class TestSeparableProjectors:
    """Fast dual-space solvers agree with the generic numeric projector."""

    @pytest.mark.parametrize("beta", [2.0 ** -5, 0.5, 4.0])
    def test_hypentropy_simplex(self, beta):
        reg = Hypentropy(beta)
        dom = Domain.simplex(6)
        proj = bregman_projector(reg, dom)
        rng = np.random.default_rng(6)
        for _ in range(10):
            theta = rng.normal(0, 3, size=6)
            z = proj.from_dual(theta)
            z_ref = bregman_project_numeric(reg, reg.mirror_inverse(theta), dom, 1e-7)
            np.testing.assert_allclose(z, z_ref, atol=1e-5)
            assert abs(z.sum() - 1.0) < 1e-12
            assert np.all(z >= 0.0)

    @pytest.mark.parametrize("beta", [2.0 ** -4, 1.0, 8.0])
    def test_hypentropy_ball(self, beta):
        reg = Hypentropy(beta)
        dom = Domain.l2_ball(5)
        proj = bregman_projector(reg, dom)
        rng = np.random.default_rng(7)
        for _ in range(10):
            theta = rng.normal(0, 4, size=5)
            z = proj.from_dual(theta)
            z_ref = bregman_project_numeric(reg, reg.mirror_inverse(theta), dom, 1e-7)
            np.testing.assert_allclose(z, z_ref, atol=1e-5)
            assert np.linalg.norm(z - dom.center) <= dom.radius + 1e-12

    def test_huge_duals_do_not_overflow(self):
        proj = bregman_projector(Hypentropy(0.5), Domain.simplex(4))
        z = proj.from_dual(np.array([900.0, 880.0, -50.0, 100.0]))
        assert abs(z.sum() - 1.0) < 1e-9
        assert z[0] > 0.99

    def test_entropy_simplex_is_softmax(self):
        proj = bregman_projector(NegEntropy(), Domain.simplex(3))
        theta = np.array([0.1, 1.2, -0.4])
        w = np.exp(theta - theta.max())
        np.testing.assert_allclose(proj.from_dual(theta), w / w.sum(), atol=1e-15)


class TestDomain:
    def test_simplex_diameters(self):
        dom = Domain.simplex(5)
        assert dom.diameter_l1 == 2.0
        assert dom.diameter_l2 == pytest.approx(np.sqrt(2.0))

    def test_ball_diameters(self):
        dom = Domain.l2_ball(3, radius=2.5)
        assert dom.diameter_l2 == 5.0

    def test_contains(self):
        dom = Domain.simplex(3)
        assert dom.contains([0.2, 0.3, 0.5])
        assert not dom.contains([0.2, 0.3, 0.6])
        ball = Domain.l2_ball(2)
        assert ball.contains([0.6, 0.8])
        assert not ball.contains([0.8, 0.8])

    def test_linear_minimizer(self):
        dom = Domain.simplex(3)
        np.testing.assert_allclose(dom.linear_minimizer([1.0, 3.0, 2.0]), [1, 0, 0])
        ball = Domain.l2_ball(2)
        np.testing.assert_allclose(ball.linear_minimizer([3.0, 4.0]), [-0.6, -0.8])

    def test_samples_feasible(self):
        rng = np.random.default_rng(8)
        for dom in (Domain.simplex(4), Domain.l2_ball(4, radius=1.5)):
            for x in dom.sample(rng, 200):
                assert dom.contains(x, tol=1e-9)

    def test_invalid_dimension(self):
        with pytest.raises(DomainError):
            Domain.simplex(0)
