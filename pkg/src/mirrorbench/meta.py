"""Meta-algorithms that track the best of a family of gradient-based learners.

``MasterGD`` queries every learner each round, plays the probability mixture
of their predictions, evaluates the cost oracle once at the mixture, and
feeds every learner the normalized linearized loss through a full-feedback
expert engine (Squint or Hedge).

``FastMasterGD`` samples a single learner per round, materializes only that
learner's closed-form prediction from one shared gradient-sum accumulator,
and updates a bandit engine (Exp3 or Tsallis-regularized weights) with the
importance-weighted loss.  Per-round work is O(d + K) instead of O(K d).

The module also exposes the run-level inequality checks that the regret
analysis turns into testable statements.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bench import CostOracle, RegretLedger
from .diagnostics import Diagnostics
from .errors import ConfigError, DomainError, IntegrityError
from .experts import (Exp3, GBPA, Hedge, Squint, exp3_eta, gbpa_eta, hedge_eta,
                      importance_weighted_loss)
from .geometry import Domain
from .optimizers import AnytimeStep, OnlineOptimizer, dual_norm
from .regularizers import Quadratic, diameter


class SurrogateNormalizer:
    """Map raw surrogate values <grad, x> into [0, 1] losses.

    l = raw/(2F) + 1/2, clipped into [0, 1]; clips are counted because they
    signal that F was not actually an upper bound for the run.
    """

    def __init__(self, bound: float, diag: Diagnostics | None = None):
        if bound <= 0:
            raise ConfigError("F", "surrogate bound must be positive")
        self.bound = float(bound)
        self.diag = diag if diag is not None else Diagnostics()

    def observe(self, grad) -> None:
        """Hook for running-max policies; the static normalizer ignores it."""

    def normalize(self, raw):
        raw = np.asarray(raw, dtype=float)
        loss = raw / (2.0 * self.bound) + 0.5
        clipped = np.clip(loss, 0.0, 1.0)
        n_clip = int(np.sum(loss != clipped))
        if n_clip:
            self.diag.loss_clips += n_clip
        return clipped


def estimate_surrogate_bound(stream, dom: Domain, warmup_rounds: int = 100,
                             initial_guess: float = 1.0) -> float:
    """F = L * D with L measured from a short projected-OGD probe.

    The probe replays the first ``warmup_rounds`` of the stream and records
    dual gradient norms in the domain's natural norm pairing (l1/linf on the
    simplex, l2/l2 on the ball).  The returned bound is never below the
    initial guess.
    """
    rounds = min(warmup_rounds, stream.T)
    probe = OnlineOptimizer(
        Quadratic(), dom, AnytimeStep(1.0, 0.5 * dom.diameter_l2 ** 2), mode="ogd")
    tag = "l1" if dom.kind == Domain.SIMPLEX else "l2"
    diam = dom.diameter_l1 if dom.kind == Domain.SIMPLEX else dom.diameter_l2
    lip = 0.0
    for t in range(1, rounds + 1):
        _, grad = stream.loss(t, probe.predict())
        lip = max(lip, dual_norm(grad, tag))
        probe.step(grad)
    return max(float(initial_guess), lip * diam)


def make_engine(kind: str, K: int, T: int, eta: float | None = None,
                alpha: float = 0.5):
    """Expert-advice engine by name with the documented default rates."""
    if kind == "squint":
        return Squint(K, eta=0.5 if eta is None else eta)
    if kind == "hedge":
        return Hedge(K, eta=hedge_eta(K, T) if eta is None else eta)
    if kind == "exp3":
        return Exp3(K, eta=exp3_eta(K, T) if eta is None else eta)
    if kind == "gbpa":
        return GBPA(K, eta=gbpa_eta(K, T, alpha) if eta is None else eta, alpha=alpha)
    raise ConfigError("engine", f"unknown expert engine {kind!r}")


class MasterGD:
    """Full-feedback meta-optimizer playing the mixture of K predictions."""

    kind = "mgd"

    def __init__(self, optimizers: list[OnlineOptimizer], engine, bound: float,
                 dom: Domain):
        if not optimizers:
            raise ConfigError("family", "need at least one optimizer")
        if engine.kind not in ("squint", "hedge"):
            raise ConfigError("engine", "MGD needs a full-feedback engine")
        if engine.K != len(optimizers):
            raise ConfigError("engine", "engine arm count must match the family size")
        self.optimizers = optimizers
        self.engine = engine
        self.dom = dom
        self.diag = Diagnostics()
        self.normalizer = SurrogateNormalizer(bound, self.diag)
        self.t = 0

    @property
    def K(self) -> int:
        return len(self.optimizers)

    def round(self, oracle, ledger: RegretLedger | None = None) -> np.ndarray:
        tic = time.perf_counter()
        self.t += 1
        preds = np.stack([opt.predict() for opt in self.optimizers])
        probs = self.engine.weights.copy()
        x = probs @ preds
        if not self.dom.contains(x, tol=1e-9):
            raise DomainError("mixture left the feasible set; convexity violated")
        value, grad = oracle(x)
        surrogates = preds @ grad
        self.normalizer.observe(grad)
        self.engine.update(self.normalizer.normalize(surrogates))
        for opt in self.optimizers:
            opt.step(grad)
        if ledger is not None:
            ledger.record(self.t, x, value, grad, time.perf_counter() - tic,
                          surrogates=surrogates, weights=probs)
        return x

    def run(self, stream) -> RegretLedger:
        ledger = RegretLedger(stream.T, self.dom.dim, "mgd", K=self.K)
        oracle = CostOracle(stream)
        for _ in range(stream.T):
            self.round(oracle, ledger)
        ledger.oracle_calls = oracle.calls
        ledger.surrogate_bound = self.normalizer.bound
        ledger.loss_clips = self.diag.loss_clips
        ledger.finalize(self.dom, stream)
        return ledger


class FastMasterGD:
    """Bandit-feedback meta-optimizer; one closed-form prediction per round.

    All learners must be in lazy_closed_form mode.  A single gradient-sum
    accumulator is shared: every learner conceptually receives every
    surrogate gradient, but only the sampled one materializes a point.
    """

    kind = "fmgd"

    def __init__(self, optimizers: list[OnlineOptimizer], engine, bound: float,
                 dom: Domain, rng: np.random.Generator):
        if not optimizers:
            raise ConfigError("family", "need at least one optimizer")
        if any(opt.mode != "lazy_closed_form" for opt in optimizers):
            raise ConfigError("family", "FMGD requires lazy_closed_form optimizers")
        if engine.kind not in ("exp3", "gbpa"):
            raise ConfigError("engine", "FMGD needs a bandit engine")
        if engine.K != len(optimizers):
            raise ConfigError("engine", "engine arm count must match the family size")
        self.optimizers = optimizers
        self.engine = engine
        self.dom = dom
        self.rng = rng
        self.diag = Diagnostics()
        self.normalizer = SurrogateNormalizer(bound, self.diag)
        self.grad_sum = np.zeros(dom.dim)
        self.t = 0

    @property
    def K(self) -> int:
        return len(self.optimizers)

    def round(self, oracle, ledger: RegretLedger | None = None) -> np.ndarray:
        tic = time.perf_counter()
        self.t += 1
        probs = self.engine.weights.copy()
        arm = int(np.searchsorted(np.cumsum(probs), self.rng.random(), side="right"))
        arm = min(arm, self.K - 1)
        opt = self.optimizers[arm]
        eta = opt.schedule.value(self.t)
        x = opt.closed_form_point(self.grad_sum, eta)
        value, grad = oracle(x)
        self.normalizer.observe(grad)
        loss = float(self.normalizer.normalize(float(grad @ x)))
        self.engine.update(importance_weighted_loss(loss, arm, probs))
        self.grad_sum += grad
        norms = {"l2": dual_norm(grad, "l2"), "l1": dual_norm(grad, "l1")}
        for o in self.optimizers:
            o.schedule.observe(norms[o.reg.norm_tag])
            o.t += 1
        if ledger is not None:
            ledger.record(self.t, x, value, grad, time.perf_counter() - tic,
                          weights=probs, arm=arm)
        return x

    def run(self, stream) -> RegretLedger:
        ledger = RegretLedger(stream.T, self.dom.dim, "fmgd", K=self.K, bandit=True)
        oracle = CostOracle(stream)
        for _ in range(stream.T):
            self.round(oracle, ledger)
        ledger.oracle_calls = oracle.calls
        ledger.surrogate_bound = self.normalizer.bound
        ledger.loss_clips = self.diag.loss_clips
        ledger.finalize(self.dom, stream)
        return ledger


# ---------------------------------------------------------------------------
# Run-level inequality checks
# ---------------------------------------------------------------------------

@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs

    def as_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "passed": bool(self.passed)}


def surrogate_regret_dominates(ledger: RegretLedger) -> BoundCheck:
    """Convexity check: true regret <= linearized regret at the same comparator."""
    lhs = ledger.final_regret
    rhs = float(ledger.play_surrogate.sum() - ledger.grad_total @ ledger.comparator)
    return BoundCheck("surrogate_dominates", lhs, rhs)


def normalized_losses(ledger: RegretLedger) -> np.ndarray:
    """Recompute the clipped normalized per-expert losses from raw surrogates."""
    if ledger.expert_surrogates is None:
        raise IntegrityError("bandit ledgers lack per-expert surrogate losses")
    return np.clip(ledger.expert_surrogates / (2.0 * ledger.surrogate_bound) + 0.5,
                   0.0, 1.0)


def decompose_regret(ledger: RegretLedger, expert: int) -> tuple[float, float]:
    """Proposition terms: (2F * expert-advice regret, expert surrogate regret)."""
    losses = normalized_losses(ledger)
    mix = np.sum(ledger.expert_weights * losses, axis=1)
    meta = 2.0 * ledger.surrogate_bound * float(mix.sum() - losses[:, expert].sum())
    return meta, ledger.surrogate_regret(expert)


def expert_regret_variance(ledger: RegretLedger) -> np.ndarray:
    """V_T(i) = sum over rounds of (<p_t, l_t> - l_t(i))^2."""
    losses = normalized_losses(ledger)
    mix = np.sum(ledger.expert_weights * losses, axis=1)
    r = mix[:, None] - losses
    return np.sum(r * r, axis=0)


def measured_lipschitz(ledger: RegretLedger, norm_tag: str) -> float:
    """Max dual gradient norm realized over the run."""
    if norm_tag == "l2":
        return float(np.max(np.linalg.norm(ledger.grads, axis=1)))
    return float(np.max(np.abs(ledger.grads)))


def omd_bound_value(ledger: RegretLedger, opt: OnlineOptimizer) -> float:
    """Theorem-A.2 style bound L sqrt(2 D T / rho) with analytic diameter."""
    D = diameter(opt.reg, opt.dom, opt.x0, mode="analytic").value
    L = measured_lipschitz(ledger, opt.reg.norm_tag)
    return float(L * np.sqrt(2.0 * D * ledger.T / opt.reg.rho))


def check_framework_decomposition(ledger: RegretLedger) -> list[BoundCheck]:
    """True regret <= 2F R^A(i) + R^{OCO_i} for every expert i."""
    checks = []
    for i in range(ledger.K):
        meta, expert = decompose_regret(ledger, i)
        checks.append(BoundCheck(f"framework_decomposition[{i}]",
                                 ledger.final_regret, meta + expert))
    return checks


def check_squint_master_bound(ledger: RegretLedger) -> list[BoundCheck]:
    """True regret <= 4F sqrt(V_T(i) ln K) + R^{OCO_i} for every i."""
    V = expert_regret_variance(ledger)
    lnK = np.log(ledger.K)
    checks = []
    for i in range(ledger.K):
        rhs = 4.0 * ledger.surrogate_bound * float(np.sqrt(V[i] * lnK)) \
            + ledger.surrogate_regret(i)
        checks.append(BoundCheck(f"squint_master[{i}]", ledger.final_regret, rhs))
    return checks


def check_omd_expert_bounds(ledger: RegretLedger,
                            optimizers: list[OnlineOptimizer]) -> list[BoundCheck]:
    """Each expert's surrogate regret respects its own OMD bound."""
    checks = []
    for i, opt in enumerate(optimizers):
        checks.append(BoundCheck(f"omd_expert[{i}:{opt.reg.kind}]",
                                 ledger.surrogate_regret(i),
                                 omd_bound_value(ledger, opt)))
    return checks


def check_best_regularizer_bound(ledger: RegretLedger,
                                 optimizers: list[OnlineOptimizer]) -> list[BoundCheck]:
    """Best-regularizer master bounds, per-expert and best-expert forms."""
    lnK = np.log(ledger.K)
    F = ledger.surrogate_bound
    T = ledger.T
    checks = []
    per_expert = []
    for i, opt in enumerate(optimizers):
        b = omd_bound_value(ledger, opt)
        per_expert.append((4.0 * np.sqrt(lnK) + 1.0) * b)
        checks.append(BoundCheck(f"best_regularizer_two_term[{i}:{opt.reg.kind}]",
                                 ledger.final_regret,
                                 4.0 * F * np.sqrt(T * lnK) + b))
    checks.append(BoundCheck("best_regularizer_product",
                             ledger.final_regret, float(min(per_expert))))
    return checks


def check_bandit_master_bound(ledgers: list[RegretLedger],
                              optimizer_sets: list[list[OnlineOptimizer]],
                              engine_kind: str = "gbpa") -> list[BoundCheck]:
    """Seed-averaged bandit meta bound: E R_T <= c F sqrt(...) + B^{OCO_i}.

    c sqrt(...) is 8 sqrt(T K) for the Tsallis engine at alpha = 1/2 and
    4 sqrt(T K ln K) for Exp3 (the weaker of the stated constants).
    """
    if not ledgers:
        raise IntegrityError("no ledgers to average")
    K = ledgers[0].K
    T = ledgers[0].T
    mean_regret = float(np.mean([led.final_regret for led in ledgers]))
    if engine_kind == "gbpa":
        meta_factor = 8.0 * np.sqrt(T * K)
    else:
        meta_factor = 4.0 * np.sqrt(T * K * np.log(K))
    mean_meta = float(np.mean([led.surrogate_bound * meta_factor for led in ledgers]))
    checks = []
    for i in range(K):
        mean_bound = float(np.mean([
            omd_bound_value(led, opts[i])
            for led, opts in zip(ledgers, optimizer_sets)]))
        checks.append(BoundCheck(f"bandit_master[{i}]", mean_regret,
                                 mean_meta + mean_bound))
    return checks
