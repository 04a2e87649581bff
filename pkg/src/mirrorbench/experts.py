"""Expert-advice engines over K arms.

Full feedback: ``Hedge`` (exponential weights) and ``Squint`` (second-order
weights driven by instantaneous regrets).  Bandit feedback: ``Exp3``
(exponential weights on importance-weighted estimates) and ``GBPA``
(follow-the-regularized-leader with Tsallis entropy, solved by a scalar
root-find on the normalization multiplier).

All exponential weights are maintained in log space with running max
subtraction, so the probability vectors stay strictly positive and
normalized.  The engines never sample; callers draw arms from ``weights``
with their own seeded generator.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateWeightsError, DomainError, SolverError


def _softmax(logw: np.ndarray) -> np.ndarray:
    w = np.exp(logw - logw.max())
    return w / w.sum()


def hedge_eta(K: int, T: int) -> float:
    """Default Hedge rate sqrt(log K / T)."""
    return float(np.sqrt(np.log(K) / T))


def exp3_eta(K: int, T: int) -> float:
    """Default EXP3 rate sqrt(2 log K / (T K))."""
    return float(np.sqrt(2.0 * np.log(K) / (T * K)))


def gbpa_eta(K: int, T: int, alpha: float = 0.5) -> float:
    """Rate minimizing the two-term Tsallis bound eta*A + B/eta.

    A = (K^(1-alpha) - 1)/(1 - alpha) and B = K^alpha T / (2 alpha); as
    alpha -> 1 this tends to sqrt(K T / (2 log K)), the reciprocal of the
    EXP3 default.
    """
    a = (K ** (1.0 - alpha) - 1.0) / (1.0 - alpha)
    b = K ** alpha * T / (2.0 * alpha)
    return float(np.sqrt(b / a))


def importance_weighted_loss(loss_observed: float, arm: int, probs: np.ndarray) -> np.ndarray:
    """Unbiased loss-estimate vector: loss/p(arm) at the played arm, 0 elsewhere."""
    probs = np.asarray(probs, dtype=float)
    p = probs[arm]
    if p < 1e-12:
        raise DegenerateWeightsError(f"probability {p:.3e} of arm {arm} is numerically zero")
    out = np.zeros_like(probs)
    out[arm] = loss_observed / p
    return out


def _tsallis_solve(cumulative: np.ndarray, eta: float, alpha: float,
                   tol: float, max_iter: int,
                   lam0: float | None) -> tuple[np.ndarray, float]:
    c = np.asarray(cumulative, dtype=float) / eta
    scale = (1.0 - alpha) / alpha
    expo = 1.0 / (alpha - 1.0)  # negative
    floor = -float(c.min())  # weights blow up as lam -> floor+

    def weight_sum(lam: float) -> np.ndarray:
        return np.power((lam + c) * scale, expo)

    # bracket the root of sum(p(lam)) = 1; the sum is decreasing in lam
    lam = floor + (c.size ** (1.0 / expo)) / scale  # uniform-sum heuristic
    if lam0 is not None and lam0 > floor:
        lam = lam0
    lo = hi = lam
    while weight_sum(hi).sum() > 1.0:
        hi = floor + 2.0 * (hi - floor)
    while weight_sum(lo).sum() < 1.0:
        lo = floor + 0.5 * (lo - floor)
    g = np.inf
    for _ in range(max_iter):
        p = weight_sum(lam)
        g = float(p.sum() - 1.0)
        if abs(g) < tol:
            return p / p.sum(), lam
        if g > 0.0:
            lo = lam
        else:
            hi = lam
        dp = expo * scale * np.power((lam + c) * scale, expo - 1.0)
        nxt = lam - g / float(dp.sum())
        lam = nxt if min(lo, hi) < nxt < max(lo, hi) else 0.5 * (lo + hi)
    raise SolverError("Tsallis normalization did not converge", lo, hi, abs(g))


def tsallis_weights(cumulative: np.ndarray, eta: float, alpha: float,
                    tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Weights maximizing <-L/eta, p> + S_alpha(p) over the simplex.

    S_alpha is the (concave) Tsallis entropy; stationarity gives
    p(a) = ((lam + L(a)/eta) (1-alpha)/alpha)^(1/(alpha-1)) with lam the
    normalization multiplier, found by Newton with bisection fallback on
    sum(p) - 1.  At alpha = 1/2 this is p(a) proportional to
    (lam + L(a)/eta)^(-2).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if eta <= 0:
        raise DomainError("eta must be positive")
    p, _ = _tsallis_solve(cumulative, eta, alpha, tol, max_iter, None)
    return p


class Hedge:
    """p(a) proportional to exp(-eta * cumulative loss of arm a)."""

    kind = "hedge"

    def __init__(self, K: int, eta: float):
        self.K = int(K)
        self.eta = float(eta)
        self.cum_losses = np.zeros(K)
        self.weights = np.full(K, 1.0 / K)

    def update(self, losses) -> np.ndarray:
        losses = np.asarray(losses, dtype=float)
        self.cum_losses += losses
        self.weights = _softmax(-self.eta * self.cum_losses)
        return self.weights


class Squint:
    """Second-order expert weights from instantaneous regrets.

    With r_t(i) = <p_t, l_t> - l_t(i), the weights are
    p(i) proportional to p1(i) exp(eta R_t(i) - eta^2 V_t(i)) where R sums
    the regrets and V their squares.  Valid for eta <= 1/2 on [0,1] losses.
    """

    kind = "squint"

    def __init__(self, K: int, eta: float = 0.5, prior: np.ndarray | None = None):
        self.K = int(K)
        self.eta = float(eta)
        self.prior = np.full(K, 1.0 / K) if prior is None else np.asarray(prior, dtype=float)
        if abs(self.prior.sum() - 1.0) > 1e-9 or np.any(self.prior <= 0):
            raise DomainError("prior must be a strictly positive distribution")
        self.regret_sum = np.zeros(K)
        self.regret_sq_sum = np.zeros(K)
        self.weights = self.prior.copy()

    def update(self, losses) -> np.ndarray:
        losses = np.asarray(losses, dtype=float)
        r = float(self.weights @ losses) - losses
        self.regret_sum += r
        self.regret_sq_sum += r * r
        logw = np.log(self.prior) + self.eta * self.regret_sum \
            - self.eta ** 2 * self.regret_sq_sum
        self.weights = _softmax(logw)
        return self.weights


class Exp3:
    """Exponential weights on importance-weighted loss estimates."""

    kind = "exp3"

    def __init__(self, K: int, eta: float):
        self.K = int(K)
        self.eta = float(eta)
        self.cum_estimates = np.zeros(K)
        self.weights = np.full(K, 1.0 / K)

    def update(self, estimates) -> np.ndarray:
        estimates = np.asarray(estimates, dtype=float)
        self.cum_estimates += estimates
        self.weights = _softmax(-self.eta * self.cum_estimates)
        return self.weights


class GBPA:
    """Tsallis-regularized bandit weights; alpha -> 1 recovers Exp3.

    The normalization multiplier is warm-started from the previous round,
    which keeps the per-update root-find to a couple of Newton steps.
    """

    kind = "gbpa"

    def __init__(self, K: int, eta: float, alpha: float = 0.5):
        if not 0.0 < alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        self.K = int(K)
        self.eta = float(eta)
        self.alpha = float(alpha)
        self.cum_estimates = np.zeros(K)
        self.weights, self._lam = _tsallis_solve(
            self.cum_estimates, self.eta, self.alpha, 1e-12, 200, None)

    def update(self, estimates) -> np.ndarray:
        estimates = np.asarray(estimates, dtype=float)
        self.cum_estimates += estimates
        self.weights, self._lam = _tsallis_solve(
            self.cum_estimates, self.eta, self.alpha, 1e-12, 200, self._lam)
        return self.weights


def hedge_update(state: Hedge, losses) -> np.ndarray:
    return state.update(losses)


def squint_update(state: Squint, losses) -> np.ndarray:
    return state.update(losses)


def exp3_update(state: Exp3, estimates) -> np.ndarray:
    return state.update(estimates)


def gbpa_tsallis_weights(cumulative, eta: float, alpha: float) -> np.ndarray:
    return tsallis_weights(np.asarray(cumulative, dtype=float), eta, alpha)
