"""Base learners: step schedules, fixed points, mode equivalences, regret."""

import numpy as np
import pytest

from mirrorbench.errors import ConfigError
from mirrorbench.geometry import Domain
from mirrorbench.optimizers import (AnytimeStep, FixedStep, OnlineOptimizer,
                                    ogd_step, omd_agile_step,
                                    omd_lazy_closed_form, omd_lazy_step,
                                    step_size)
from mirrorbench.regularizers import Hypentropy, NegEntropy, Quadratic, diameter


class TestStepSchedules:
    def test_anytime_values(self):
        sched = AnytimeStep(rho=1.0, diameter=2.0, initial_l=1.0)
        assert step_size(sched, 1) == pytest.approx(2.0)
        assert step_size(sched, 4) == pytest.approx(1.0)

    def test_fixed_constant(self):
        sched = FixedStep(0.1)
        for t in (1, 10, 1000):
            assert step_size(sched, t) == 0.1

    def test_nonincreasing(self):
        sched = AnytimeStep(1.0, 3.0)
        vals = [sched.value(t) for t in range(1, 50)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_running_max(self):
        sched = AnytimeStep(1.0, 2.0, initial_l=1.0)
        sched.observe(5.0)
        assert sched.lipschitz == 5.0
        sched.observe(2.0)
        assert sched.lipschitz == 5.0
        assert sched.value(1) == pytest.approx(0.4)

    def test_invalid_parameters(self):
        with pytest.raises(ConfigError):
            AnytimeStep(0.0, 1.0)
        with pytest.raises(ConfigError):
            AnytimeStep(1.0, -1.0)
        with pytest.raises(ConfigError):
            FixedStep(0.0)
        with pytest.raises(ConfigError):
            step_size(FixedStep(0.1), 0)


class TestFixedPoints:
    @pytest.mark.parametrize("mode", ["ogd", "agile", "lazy_iterative",
                                      "lazy_closed_form"])
    def test_zero_gradient_keeps_start(self, mode):
        dom = Domain.simplex(4)
        opt = OnlineOptimizer(NegEntropy(), dom, FixedStep(0.5), mode=mode) \
            if mode != "ogd" else \
            OnlineOptimizer(Quadratic(), dom, FixedStep(0.5), mode=mode)
        x0 = opt.predict().copy()
        for _ in range(5):
            opt.step(np.zeros(4))
        np.testing.assert_allclose(opt.predict(), x0, atol=1e-12)

    def test_initial_prediction_is_x0(self):
        dom = Domain.l2_ball(3)
        opt = OnlineOptimizer(Hypentropy(1.0), dom, FixedStep(0.1),
                              mode="lazy_closed_form")
        np.testing.assert_allclose(opt.predict(), dom.start_point())
        assert opt.t == 0


class TestModeEquivalences:
    def test_quadratic_agile_equals_ogd(self):
        rng = np.random.default_rng(0)
        for dom in (Domain.l2_ball(5), Domain.simplex(5)):
            a = OnlineOptimizer(Quadratic(), dom, AnytimeStep(1.0, 1.0), mode="agile")
            b = OnlineOptimizer(Quadratic(), dom, AnytimeStep(1.0, 1.0), mode="ogd")
            for _ in range(200):
                g = rng.normal(size=5)
                xa, xb = a.step(g), b.step(g)
                assert np.max(np.abs(xa - xb)) <= 1e-12

    def test_entropy_agile_is_multiplicative_weights(self):
        dom = Domain.simplex(6)
        eta = 0.2
        opt = OnlineOptimizer(NegEntropy(), dom, FixedStep(eta), mode="agile")
        x = dom.start_point()
        rng = np.random.default_rng(1)
        for _ in range(300):
            g = rng.normal(size=6)
            x = x * np.exp(-eta * g)
            x = x / x.sum()
            got = opt.step(g)
            assert np.max(np.abs(got - x)) <= 1e-12
            x = got  # resynchronize to stop float drift compounding

    @pytest.mark.parametrize("reg", [Quadratic(), NegEntropy(), Hypentropy(0.5)])
    def test_lazy_iterative_matches_closed_form(self, reg):
        dom = Domain.simplex(5) if reg.kind == "neg_entropy" else Domain.l2_ball(5)
        eta = 0.05
        it = OnlineOptimizer(reg, dom, FixedStep(eta), mode="lazy_iterative")
        cf = OnlineOptimizer(reg, dom, FixedStep(eta), mode="lazy_closed_form")
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(1000):
            g = rng.normal(size=5)
            worst = max(worst, float(np.max(np.abs(it.step(g) - cf.step(g)))))
        assert worst <= 1e-9

    def test_closed_form_deterministic(self):
        dom = Domain.simplex(4)
        mk = lambda: OnlineOptimizer(Hypentropy(0.25), dom, FixedStep(0.1),
                                     mode="lazy_closed_form")
        a, b = mk(), mk()
        rng = np.random.default_rng(3)
        for _ in range(100):
            g = rng.normal(size=4)
            xa, xb = a.step(g), b.step(g)
            assert np.array_equal(xa, xb)

    def test_quadratic_lazy_unconstrained_is_linear(self):
        # interior trajectory: x_t = x0 - eta * S_t while feasible
        dom = Domain.l2_ball(3, radius=100.0)
        opt = OnlineOptimizer(Quadratic(), dom, FixedStep(0.01),
                              mode="lazy_iterative")
        rng = np.random.default_rng(4)
        S = np.zeros(3)
        for _ in range(50):
            g = rng.normal(size=3)
            S += g
            x = opt.step(g)
            np.testing.assert_allclose(x, dom.start_point() - 0.01 * S, atol=1e-12)


class TestFeasibilityAndState:
    @pytest.mark.parametrize("mode", ["ogd", "agile", "lazy_iterative",
                                      "lazy_closed_form"])
    @pytest.mark.parametrize("case", [
        (Quadratic(), Domain.simplex(5)),
        (Quadratic(), Domain.l2_ball(5)),
        (NegEntropy(), Domain.simplex(5)),
        (Hypentropy(0.5), Domain.simplex(5)),
        (Hypentropy(2.0), Domain.l2_ball(5)),
    ])
    def test_always_feasible(self, mode, case):
        reg, dom = case
        if mode == "ogd" and reg.kind != "quadratic":
            pytest.skip("ogd is the Euclidean learner")
        opt = OnlineOptimizer(reg, dom, AnytimeStep(reg.rho, 1.0, initial_l=0.1),
                              mode=mode)
        rng = np.random.default_rng(5)
        for _ in range(300):
            x = opt.step(rng.normal(0, 2, size=5))
            assert dom.contains(x, tol=1e-9)

    def test_grad_sum_exact(self):
        dom = Domain.l2_ball(3)
        opt = OnlineOptimizer(Quadratic(), dom, FixedStep(0.1), mode="ogd")
        rng = np.random.default_rng(6)
        G = rng.normal(size=(40, 3))
        for g in G:
            opt.step(g)
        np.testing.assert_allclose(opt.grad_sum, G.sum(axis=0), atol=1e-12)
        assert opt.t == 40

    def test_ogd_large_step_lands_on_boundary(self):
        dom = Domain.l2_ball(3)
        opt = OnlineOptimizer(Quadratic(), dom, FixedStep(100.0), mode="ogd")
        x = opt.step(np.array([1.0, 1.0, 1.0]))
        assert abs(np.linalg.norm(x) - 1.0) <= 1e-12

    def test_mode_guards(self):
        dom = Domain.l2_ball(2)
        opt = OnlineOptimizer(Quadratic(), dom, FixedStep(0.1), mode="agile")
        with pytest.raises(ConfigError):
            ogd_step(opt, np.zeros(2))
        with pytest.raises(ConfigError):
            omd_lazy_step(opt, np.zeros(2))
        with pytest.raises(ConfigError):
            omd_lazy_closed_form(opt, np.zeros(2))
        assert omd_agile_step(opt, np.zeros(2)) is not None


class TestOmdRegretBound:
    """Empirical Theorem-A.2 check on adversarial linear streams."""

    @pytest.mark.parametrize("reg,dom", [
        (Quadratic(), Domain.l2_ball(5)),
        (NegEntropy(), Domain.simplex(5)),
        (Hypentropy(0.5), Domain.simplex(5)),
        (Hypentropy(2.0), Domain.l2_ball(5)),
    ])
    def test_regret_below_bound(self, reg, dom):
        T = 2000
        D = diameter(reg, dom, mode="analytic").value
        opt = OnlineOptimizer(reg, dom, AnytimeStep(reg.rho, D, initial_l=1e-6),
                              mode="lazy_closed_form")
        rng = np.random.default_rng(9)
        total = 0.0
        S = np.zeros(5)
        lipschitz = 0.0
        for _ in range(T):
            g = rng.normal(size=5)
            x = opt.predict()
            total += float(g @ x)
            S += g
            gn = float(np.max(np.abs(g))) if reg.norm_tag == "l1" \
                else float(np.linalg.norm(g))
            lipschitz = max(lipschitz, gn)
            opt.step(g)
        regret = total - float(S @ dom.linear_minimizer(S))
        assert regret <= lipschitz * np.sqrt(2.0 * D * T / reg.rho)
