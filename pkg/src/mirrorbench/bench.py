"""Synthetic streams, loss functions, regret accounting, and timing.

The regression stream reproduces the online linear regression setup: features
drawn from a truncated normal, a hidden weight drawn uniformly from the l2
ball, targets contaminated with unit Gaussian noise, square loss.  The
adversarial stream plays signed scaled basis vectors uniformly at random and
realizes the sqrt(T) regret floor.
"""

from __future__ import annotations

import time

import numpy as np

from .errors import ConvergenceError, DomainError, IntegrityError
from .geometry import Domain
from .optimizers import AnytimeStep, OnlineOptimizer
from .regularizers import Quadratic


class RegressionStream:
    """Deterministic (seed, t) -> (features, target) regression stream."""

    kind = "regression"

    def __init__(self, seed: int, d: int, T: int, trunc_radius: float = 1.0,
                 noise: float = 1.0, trunc_mode: str = "radial"):
        if trunc_mode not in ("radial", "clip"):
            raise DomainError(f"unknown truncation mode {trunc_mode!r}")
        self.seed = int(seed)
        self.d = int(d)
        self.T = int(T)
        self.trunc_radius = float(trunc_radius)
        self.noise = float(noise)
        self.trunc_mode = trunc_mode
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(d)
        z /= np.linalg.norm(z)
        self.w = z * rng.random() ** (1.0 / d)  # uniform in the unit l2 ball
        feats = rng.standard_normal((T, d))
        if trunc_mode == "radial":
            norms = np.linalg.norm(feats, axis=1, keepdims=True)
            scale = np.minimum(1.0, self.trunc_radius / np.maximum(norms, 1e-30))
            feats *= scale
        else:
            bound = self.trunc_radius / np.sqrt(d)
            feats = np.clip(feats, -bound, bound)
        self.features = feats
        self.eps = rng.standard_normal(T) * self.noise
        self.targets = self.features @ self.w + self.eps

    def round(self, t: int) -> tuple[np.ndarray, float]:
        """Features and target for round t (1-indexed)."""
        if not 1 <= t <= self.T:
            raise DomainError(f"round {t} outside 1..{self.T}")
        return self.features[t - 1], float(self.targets[t - 1])

    def loss(self, t: int, u: np.ndarray) -> tuple[float, np.ndarray]:
        x, y = self.round(t)
        return square_loss(u, x, y)

    def comparator_costs(self, u: np.ndarray) -> np.ndarray:
        resid = self.features @ u - self.targets
        return resid * resid


class AdversarialStream:
    """Uniformly random signed scaled basis costs f_t(x) = <v_t, x>."""

    kind = "adversarial"

    def __init__(self, seed: int, d: int, T: int, lipschitz: float = 1.0,
                 scales: np.ndarray | None = None):
        if lipschitz <= 0:
            raise DomainError("lipschitz must be positive")
        self.seed = int(seed)
        self.d = int(d)
        self.T = int(T)
        self.lipschitz = float(lipschitz)
        self.scales = np.ones(d) if scales is None else np.asarray(scales, dtype=float)
        rng = np.random.default_rng(seed)
        self._idx = rng.integers(0, d, size=T)
        self._sign = rng.integers(0, 2, size=T) * 2.0 - 1.0

    def round(self, t: int) -> np.ndarray:
        if not 1 <= t <= self.T:
            raise DomainError(f"round {t} outside 1..{self.T}")
        v = np.zeros(self.d)
        i = self._idx[t - 1]
        v[i] = self._sign[t - 1] * self.lipschitz * self.scales[i]
        return v

    def loss(self, t: int, u: np.ndarray) -> tuple[float, np.ndarray]:
        v = self.round(t)
        return float(v @ u), v

    def comparator_costs(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self._sign * self.lipschitz * self.scales[self._idx] * u[self._idx]


def gen_regression_round(stream: RegressionStream, t: int):
    return stream.round(t)


def gen_adversarial_linear_round(stream: AdversarialStream, t: int):
    return stream.round(t)


def square_loss(u: np.ndarray, features: np.ndarray, target: float):
    """Value and gradient of (⟨u, x⟩ - y)^2 at u."""
    u = np.asarray(u, dtype=float)
    resid = float(features @ u) - target
    return resid * resid, 2.0 * resid * features


class CostOracle:
    """Round-counting access to a stream's cost functions."""

    def __init__(self, stream):
        self.stream = stream
        self.calls = 0
        self.t = 0

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        self.t += 1
        self.calls += 1
        return self.stream.loss(self.t, x)


def best_in_hindsight(dom: Domain, *, linear_total: np.ndarray | None = None,
                      features: np.ndarray | None = None,
                      targets: np.ndarray | None = None,
                      tol: float = 1e-10, max_iter: int = 200000) -> np.ndarray:
    """Fixed feasible point minimizing the run's total cost.

    For linear total cost S this is the domain's support minimizer (simplex:
    the vertex of the smallest coordinate of S; centered ball: the antipodal
    boundary point).  For square loss it is a projected-gradient solve of the
    summed quadratic to the requested gradient-mapping tolerance.
    """
    if linear_total is not None:
        return dom.linear_minimizer(linear_total)
    if features is None or targets is None:
        raise DomainError("need either linear_total or (features, targets)")
    gram = features.T @ features
    rhs = features.T @ targets
    lip = 2.0 * float(np.linalg.eigvalsh(gram)[-1]) + 1e-12
    step = 1.0 / lip
    u = dom.start_point()
    scale = max(1.0, float(np.linalg.norm(rhs)))
    gm_norm = np.inf
    for _ in range(max_iter):
        g = 2.0 * (gram @ u - rhs)
        un = dom.project_euclidean(u - step * g)
        gm_norm = float(np.linalg.norm(u - un) / step)
        u = un
        if gm_norm <= tol * scale:
            return u
    raise ConvergenceError("best-in-hindsight solve did not converge", gm_norm)


class RegretLedger:
    """Per-round record of one run plus regret series against a comparator.

    Full-feedback runs also store every expert's raw surrogate value and the
    expert weights, which is what the theorem checks consume.
    """

    def __init__(self, T: int, d: int, algorithm: str, K: int | None = None,
                 bandit: bool = False):
        self.T = int(T)
        self.d = int(d)
        self.K = K
        self.algorithm = algorithm
        self.bandit = bool(bandit)
        self.plays = np.zeros((T, d))
        self.costs = np.zeros(T)
        self.grads = np.zeros((T, d))
        self.wall = np.zeros(T)
        self.play_surrogate = np.zeros(T)  # <grad_t, x_t>
        if K is not None and not bandit:
            self.expert_surrogates = np.zeros((T, K))  # <grad_t, x_t^i>
            self.expert_weights = np.zeros((T, K))
        else:
            self.expert_surrogates = None
            self.expert_weights = None
        self.arms = np.full(T, -1, dtype=int) if bandit else None
        self.bandit_weights = np.zeros((T, K)) if (bandit and K) else None
        self.oracle_calls = 0
        self.surrogate_bound = None  # F used for loss normalization
        self.loss_clips = 0
        self.comparator = None
        self.comparator_surrogate = None
        self.comparator_costs = None
        self.cum_loss = None
        self.cum_regret = None
        self.avg_regret = None
        self.rounds_recorded = 0

    def record(self, t: int, x: np.ndarray, cost: float, grad: np.ndarray,
               wall: float, surrogates: np.ndarray | None = None,
               weights: np.ndarray | None = None, arm: int | None = None) -> None:
        i = t - 1
        self.plays[i] = x
        self.costs[i] = cost
        self.grads[i] = grad
        self.wall[i] = wall
        self.play_surrogate[i] = float(grad @ x)
        if surrogates is not None:
            self.expert_surrogates[i] = surrogates
        if weights is not None:
            if self.bandit:
                self.bandit_weights[i] = weights
            else:
                self.expert_weights[i] = weights
        if arm is not None:
            self.arms[i] = arm
        self.rounds_recorded = max(self.rounds_recorded, t)

    @property
    def grad_total(self) -> np.ndarray:
        return self.grads.sum(axis=0)

    def finalize(self, dom: Domain, stream) -> None:
        """Solve the comparators and build the regret series."""
        if isinstance(stream, RegressionStream):
            self.comparator = best_in_hindsight(
                dom, features=stream.features, targets=stream.targets)
        else:
            self.comparator = best_in_hindsight(dom, linear_total=self.grad_total)
        self.comparator_surrogate = dom.linear_minimizer(self.grad_total)
        self.comparator_costs = stream.comparator_costs(self.comparator)
        self.cum_loss = np.cumsum(self.costs)
        self.cum_regret = self.cum_loss - np.cumsum(self.comparator_costs)
        steps = np.arange(1, self.T + 1)
        self.avg_regret = self.cum_regret / steps

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1])

    def surrogate_regret(self, expert: int | None = None) -> float:
        """Surrogate regret of the plays (or of one expert) vs the linear comparator."""
        base = float(self.grad_total @ self.comparator_surrogate)
        if expert is None:
            return float(self.play_surrogate.sum()) - base
        if self.expert_surrogates is None:
            raise IntegrityError("bandit ledgers do not store per-expert surrogates")
        return float(self.expert_surrogates[:, expert].sum()) - base

    def median_wall_ms(self) -> float:
        return float(np.median(self.wall) * 1e3)

    def csv_rows(self):
        """Rows t,algorithm,cum_loss,cum_regret,avg_regret,wall_ms."""
        for i in range(self.T):
            yield (i + 1, self.algorithm, self.cum_loss[i], self.cum_regret[i],
                   self.avg_regret[i], self.wall[i] * 1e3)


def run_single_optimizer(optimizer: OnlineOptimizer, stream, dom: Domain,
                         algorithm: str | None = None) -> RegretLedger:
    """Drive one base learner over a stream, one oracle call per round."""
    T = stream.T
    ledger = RegretLedger(T, dom.dim, algorithm or optimizer.name)
    oracle = CostOracle(stream)
    for t in range(1, T + 1):
        tic = time.perf_counter()
        x = optimizer.predict()
        value, grad = oracle(x)
        optimizer.step(grad)
        ledger.record(t, x, value, grad, time.perf_counter() - tic)
    ledger.oracle_calls = oracle.calls
    ledger.finalize(dom, stream)
    return ledger


def lower_bound_check(dom: Domain, lipschitz: float, T: int, n_seeds: int,
                      base_seed: int = 0) -> tuple[float, float]:
    """Adversarial-stream floor check against tuned projected OGD.

    Returns (mean realized regret over seeds, predicted floor); the floor is
    the Gaussian approximation (D L / 2) sqrt(2 T / (d pi)) for unit basis
    scales in l2 geometry, with D the domain's l2 diameter.
    """
    if dom.kind != Domain.L2_BALL:
        raise DomainError("the lower-bound construction uses a centered l2 ball")
    d = dom.dim
    D = dom.diameter_l2
    regrets = np.zeros(n_seeds)
    for s in range(n_seeds):
        stream = AdversarialStream(base_seed + s, d, T, lipschitz=lipschitz)
        sched = AnytimeStep(rho=1.0, diameter=0.5 * D ** 2, initial_l=lipschitz)
        ogd = OnlineOptimizer(Quadratic(), dom, sched, mode="ogd")
        total = 0.0
        grad_sum = np.zeros(d)
        for t in range(1, T + 1):
            x = ogd.predict()
            value, grad = stream.loss(t, x)
            total += value
            grad_sum += grad
            ogd.step(grad)
        best = dom.linear_minimizer(grad_sum)
        regrets[s] = total - float(grad_sum @ best)
    floor = (D * lipschitz / 2.0) * np.sqrt(2.0 * T / (d * np.pi))
    return float(regrets.mean()), float(floor)
