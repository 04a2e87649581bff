"""Gradient-based base learners: OGD and online mirror descent.

Every learner exposes ``predict()`` (the point to play this round) and
``step(grad)`` (consume the round's gradient and move to the next point).
Four update modes are available:

* ``ogd`` -- projected online gradient descent.
* ``agile`` -- mirror update from the current point, projected every round.
* ``lazy_iterative`` -- accumulate gradients in dual space, project on read.
* ``lazy_closed_form`` -- the O(d) closed form: keep the gradient sum S_t and
  map x0's dual point shifted by eta_t * S_t back through the conjugate
  gradient and the Bregman projection.

With a fixed step size the two lazy modes produce identical trajectories.
With the anytime schedule the closed form applies the current eta to the
whole gradient sum, which keeps O(d) state but only approximates the
iterative lazy trajectory.
"""

from __future__ import annotations

import numpy as np

from .diagnostics import Diagnostics
from .errors import ConfigError, DomainError
from .geometry import Domain, bregman_projector
from .regularizers import Regularizer

MODES = ("ogd", "agile", "lazy_iterative", "lazy_closed_form")


def dual_norm(g: np.ndarray, norm_tag: str) -> float:
    """Norm of a gradient in the dual of the tagged norm (l1 -> linf)."""
    if norm_tag == "l2":
        return float(np.linalg.norm(g))
    if norm_tag == "l1":
        return float(np.max(np.abs(g)))
    raise ConfigError("norm_tag", f"unknown norm {norm_tag!r}")


class FixedStep:
    """Constant step size."""

    kind = "fixed"

    def __init__(self, eta: float):
        if eta <= 0:
            raise ConfigError("eta", "step size must be positive")
        self.eta = float(eta)

    def observe(self, grad_dual_norm: float) -> None:
        pass

    def value(self, t: int) -> float:
        if t < 1:
            raise ConfigError("t", "round index must be >= 1")
        return self.eta


class AnytimeStep:
    """eta_t = sqrt(2 rho D) / L * t^{-1/2}.

    L defaults to a running max of observed dual gradient norms, refreshed
    before each step; pass ``initial_l`` as the pre-run guess (or the known
    Lipschitz constant, in which case it is never exceeded in benign runs).
    """

    kind = "anytime"

    def __init__(self, rho: float, diameter: float, initial_l: float = 1.0):
        if rho <= 0:
            raise ConfigError("rho", "strong convexity constant must be positive")
        if diameter <= 0:
            raise ConfigError("diameter", "Bregman diameter must be positive")
        if initial_l <= 0:
            raise ConfigError("initial_l", "Lipschitz guess must be positive")
        self.rho = float(rho)
        self.diameter = float(diameter)
        self.lipschitz = float(initial_l)

    def observe(self, grad_dual_norm: float) -> None:
        if grad_dual_norm > self.lipschitz:
            self.lipschitz = float(grad_dual_norm)

    def value(self, t: int) -> float:
        if t < 1:
            raise ConfigError("t", "round index must be >= 1")
        return np.sqrt(2.0 * self.rho * self.diameter) / self.lipschitz / np.sqrt(t)


def step_size(schedule, t: int) -> float:
    """Step size of a schedule at round t >= 1."""
    return schedule.value(t)


class OnlineOptimizer:
    """One gradient-based learner bound to a regularizer and a domain.

    The state is single-owner mutable: ``x`` is the feasible point to play
    this round, ``grad_sum`` the exact sum of observed gradients, and ``t``
    the number of gradients consumed so far.
    """

    def __init__(self, reg: Regularizer, dom: Domain, schedule,
                 x0: np.ndarray | None = None, mode: str = "lazy_closed_form",
                 name: str | None = None):
        if mode not in MODES:
            raise ConfigError("mode", f"unknown optimizer mode {mode!r}")
        self.reg = reg
        self.dom = dom
        self.schedule = schedule
        self.mode = mode
        self.name = name or f"{reg.kind}-{mode}"
        self.diag = Diagnostics()
        x0 = dom.start_point() if x0 is None else np.asarray(x0, dtype=float)
        if not dom.contains(x0, tol=1e-9):
            raise DomainError("x0 must be feasible")
        self.x0 = x0.copy()
        self.x = x0.copy()
        self.t = 0
        self.grad_sum = np.zeros(dom.dim)
        self._projector = bregman_projector(reg, dom)
        self._x0_dual = reg.mirror_map(x0, self.diag)  # cached once
        self._y_dual = self._x0_dual.copy()  # lazy_iterative dual state

    def predict(self) -> np.ndarray:
        """The feasible point to play in the upcoming round."""
        return self.x

    def step(self, grad) -> np.ndarray:
        """Consume the round's gradient and return the next point."""
        grad = np.asarray(grad, dtype=float)
        self.t += 1
        self.schedule.observe(dual_norm(grad, self.reg.norm_tag))
        self.grad_sum += grad
        if self.mode == "ogd":
            eta = self.schedule.value(self.t)
            self.x = self.dom.project_euclidean(self.x - eta * grad)
        elif self.mode == "agile":
            eta = self.schedule.value(self.t)
            theta = self.reg.mirror_map(self.x, self.diag) - eta * grad
            self.x = self._projector.from_dual(theta)
        elif self.mode == "lazy_iterative":
            eta = self.schedule.value(self.t)
            self._y_dual = self._y_dual - eta * grad
            self.x = self._projector.from_dual(self._y_dual)
        else:  # lazy_closed_form
            eta = self.schedule.value(self.t + 1)
            self.x = self.closed_form_point(self.grad_sum, eta)
        return self.x

    def closed_form_point(self, grad_sum: np.ndarray, eta: float) -> np.ndarray:
        """Pure closed-form prediction from an external gradient sum."""
        return self._projector.from_dual(self._x0_dual - eta * grad_sum)


def omd_agile_step(state: OnlineOptimizer, grad) -> np.ndarray:
    if state.mode != "agile":
        raise ConfigError("mode", "omd_agile_step requires mode='agile'")
    return state.step(grad)


def omd_lazy_step(state: OnlineOptimizer, grad) -> np.ndarray:
    if state.mode != "lazy_iterative":
        raise ConfigError("mode", "omd_lazy_step requires mode='lazy_iterative'")
    return state.step(grad)


def omd_lazy_closed_form(state: OnlineOptimizer, grad) -> np.ndarray:
    if state.mode != "lazy_closed_form":
        raise ConfigError("mode", "omd_lazy_closed_form requires mode='lazy_closed_form'")
    return state.step(grad)


def ogd_step(state: OnlineOptimizer, grad) -> np.ndarray:
    if state.mode != "ogd":
        raise ConfigError("mode", "ogd_step requires mode='ogd'")
    return state.step(grad)
