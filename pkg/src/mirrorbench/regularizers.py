"""Mirror maps, Bregman divergences, and Bregman-diameter bounds.

Three regularizer families are provided:

* ``Quadratic`` -- half squared l2 norm; the mirror map is the identity.
* ``NegEntropy`` -- convex negative entropy ``sum x_i log x_i`` so that the
  Bregman divergence is the KL divergence.  An optional signed extension
  ``sum |x_i| log |x_i|`` (mirror map with the sign carried through) makes the
  divergence well defined on ball domains.
* ``Hypentropy`` -- the hyperbolic-entropy map
  ``sum x_i arcsinh(x_i / beta) - sqrt(x_i^2 + beta^2)``, whose coordinatewise
  hessian ``1/sqrt(x^2 + beta^2)`` interpolates between the quadratic
  (beta large) and entropic (beta small) geometries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import Diagnostics
from .errors import DomainError, SaturationError, UnsupportedPairError
from .geometry import Domain, _as_vector

POSITIVITY_FLOOR = 1e-300  # coordinates are lifted here before any logarithm


def _check_overflow(out: np.ndarray, what: str) -> np.ndarray:
    bad = ~np.isfinite(out)
    if np.any(bad):
        idx = int(np.nonzero(bad)[0][0])
        raise SaturationError(f"{what} overflowed at coordinate {idx}", idx)
    return out


class Regularizer:
    """A mirror map with gradient, conjugate gradient, and convexity metadata.

    Instances are immutable after construction; all operations are pure.
    ``rho`` is the strong-convexity constant with respect to the norm named by
    ``norm_tag`` ("l1" or "l2").
    """

    kind: str
    norm_tag: str
    effective_domain: str
    rho: float

    def value(self, x) -> float:
        raise NotImplementedError

    def mirror_map(self, x, diag: Diagnostics | None = None) -> np.ndarray:
        raise NotImplementedError

    def mirror_inverse(self, theta) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Quadratic(Regularizer):
    """phi(x) = ||x||_2^2 / 2; 1-strongly convex w.r.t. the l2 norm."""

    kind = "quadratic"
    norm_tag = "l2"
    effective_domain = "all"
    rho = 1.0

    def value(self, x) -> float:
        x = _as_vector(x, "x")
        return 0.5 * float(x @ x)

    def mirror_map(self, x, diag: Diagnostics | None = None) -> np.ndarray:
        return _as_vector(x, "x").copy()

    def mirror_inverse(self, theta) -> np.ndarray:
        return _as_vector(theta, "theta").copy()


class NegEntropy(Regularizer):
    """phi(x) = sum x_i log x_i; 1-strongly convex w.r.t. l1 on the simplex.

    With ``signed=True`` the map extends to sum |x_i| log |x_i| with the sign
    carried through the gradient, for use on ball domains; the conjugate
    gradient always returns the positive branch exp(theta - 1).
    """

    kind = "neg_entropy"
    norm_tag = "l1"
    effective_domain = "positive_orthant"
    rho = 1.0

    def __init__(self, signed: bool = False):
        self.signed = bool(signed)

    def _abs_checked(self, x: np.ndarray, what: str) -> np.ndarray:
        if not self.signed and np.any(x < 0.0):
            raise DomainError(f"{what}: negative coordinate outside the entropy domain")
        return np.abs(x)

    def value(self, x) -> float:
        x = _as_vector(x, "x")
        a = self._abs_checked(x, "entropy value")
        out = np.zeros_like(a)
        pos = a > 0.0
        out[pos] = a[pos] * np.log(a[pos])
        return float(out.sum())

    def mirror_map(self, x, diag: Diagnostics | None = None) -> np.ndarray:
        x = _as_vector(x, "x")
        a = self._abs_checked(x, "entropy gradient")
        small = a < POSITIVITY_FLOOR
        if np.any(small):
            if diag is not None:
                diag.log_clamps += int(small.sum())
            a = np.maximum(a, POSITIVITY_FLOOR)
        g = 1.0 + np.log(a)
        if self.signed:
            sign = np.where(x < 0.0, -1.0, 1.0)
            return sign * g
        return g

    def mirror_inverse(self, theta) -> np.ndarray:
        theta = _as_vector(theta, "theta")
        with np.errstate(over="ignore"):
            out = np.exp(theta - 1.0)
        return _check_overflow(out, "exp")

    def __repr__(self) -> str:
        return f"NegEntropy(signed={self.signed})"


class Hypentropy(Regularizer):
    """Hyperbolic-entropy map with scale beta > 0.

    ``coord_bound`` is the largest coordinate magnitude the feasible set can
    reach; the hessian lower bound on such a set gives
    rho = 1/sqrt(beta^2 + coord_bound^2) w.r.t. the l2 norm.
    """

    kind = "hypentropy"
    norm_tag = "l2"
    effective_domain = "all"

    def __init__(self, beta: float, coord_bound: float = 1.0):
        if beta <= 0:
            raise DomainError("beta must be positive")
        self.beta = float(beta)
        self.coord_bound = float(coord_bound)
        self.rho = 1.0 / np.sqrt(self.beta ** 2 + self.coord_bound ** 2)

    def value(self, x) -> float:
        x = _as_vector(x, "x")
        return float(np.sum(x * np.arcsinh(x / self.beta) - np.sqrt(x * x + self.beta ** 2)))

    def mirror_map(self, x, diag: Diagnostics | None = None) -> np.ndarray:
        return np.arcsinh(_as_vector(x, "x") / self.beta)

    def mirror_inverse(self, theta) -> np.ndarray:
        theta = _as_vector(theta, "theta")
        with np.errstate(over="ignore"):
            out = self.beta * np.sinh(theta)
        return _check_overflow(out, "sinh")

    def _bregman(self, x: np.ndarray, y: np.ndarray) -> float:
        # expanded form; the sqrt and arcsinh differences are evaluated in a
        # cancellation-free way so large beta stays accurate
        b = self.beta
        a, c = x / b, y / b
        ra, rc = np.sqrt(1.0 + a * a), np.sqrt(1.0 + c * c)
        dasinh = np.log1p(((a - c) * (1.0 + (a + c) / (ra + rc))) / (c + rc))
        dsqrt = b * (a - c) * (a + c) / (ra + rc)
        return float(np.sum(x * dasinh - dsqrt))

    def __repr__(self) -> str:
        return f"Hypentropy(beta={self.beta})"


def bregman_divergence(reg: Regularizer, x, y) -> float:
    """B_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>."""
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    special = getattr(reg, "_bregman", None)
    if special is not None:
        return special(x, y)
    return reg.value(x) - reg.value(y) - float(reg.mirror_map(y) @ (x - y))


@dataclass(frozen=True)
class BregmanDiameter:
    """sup over the domain of B_phi(x, x0), analytic bound or sampled max."""

    value: float
    basepoint: np.ndarray
    method: str  # "analytic" | "sampled"


def _is_uniform(x0: np.ndarray, dim: int, tol: float = 1e-9) -> bool:
    return bool(np.allclose(x0, 1.0 / dim, atol=tol))


def diameter(reg: Regularizer, dom: Domain, x0=None, mode: str = "analytic",
             samples: int = 10000, rng: np.random.Generator | None = None) -> BregmanDiameter:
    """Bregman diameter of the domain seen from basepoint x0.

    Analytic mode returns the closed-form bound for supported pairs:
    negative entropy on the simplex from the uniform point -> log d;
    hypentropy on a centered ball -> 2 r^2 / beta; hypentropy on the simplex
    from the uniform point -> log(3/beta) for beta <= 1 and log 3 otherwise;
    quadratic on anything -> half the squared l2 diameter.  Unsupported pairs
    raise so callers can fall back to sampled mode, which returns the max of
    B(x_j, x0) over uniformly drawn domain points.
    """
    x0 = dom.start_point() if x0 is None else _as_vector(x0, "x0")
    if mode == "analytic":
        if reg.kind == "quadratic":
            value = 0.5 * dom.diameter_l2 ** 2
        elif reg.kind == "neg_entropy" and dom.kind == Domain.SIMPLEX:
            if not _is_uniform(x0, dom.dim):
                raise UnsupportedPairError(
                    "analytic entropy diameter requires the uniform basepoint")
            value = float(np.log(dom.dim))
        elif reg.kind == "hypentropy" and dom.kind == Domain.L2_BALL:
            if np.linalg.norm(dom.center) > 1e-12 or np.linalg.norm(x0) > 1e-12:
                raise UnsupportedPairError(
                    "analytic hypentropy ball diameter requires a centered ball and x0 = 0")
            value = 2.0 * dom.radius ** 2 / reg.beta
        elif reg.kind == "hypentropy" and dom.kind == Domain.SIMPLEX:
            if not _is_uniform(x0, dom.dim):
                raise UnsupportedPairError(
                    "analytic hypentropy simplex diameter requires the uniform basepoint")
            value = float(np.log(3.0 / reg.beta)) if reg.beta <= 1.0 else float(np.log(3.0))
        else:
            raise UnsupportedPairError(
                f"no analytic diameter for ({reg.kind}, {dom.kind})")
        return BregmanDiameter(value=value, basepoint=x0, method="analytic")
    if mode == "sampled":
        rng = np.random.default_rng(0) if rng is None else rng
        pts = dom.sample(rng, samples)
        best = max(bregman_divergence(reg, p, x0) for p in pts)
        return BregmanDiameter(value=float(best), basepoint=x0, method="sampled")
    raise DomainError(f"unknown diameter mode {mode!r}")


def make_regularizer(kind: str, beta: float | None = None, dom: Domain | None = None) -> Regularizer:
    """Build a regularizer by name, adapted to the domain it will run on."""
    if kind == "quadratic":
        return Quadratic()
    if kind == "neg_entropy":
        signed = dom is not None and dom.kind == Domain.L2_BALL
        return NegEntropy(signed=signed)
    if kind == "hypentropy":
        if beta is None:
            raise DomainError("hypentropy requires beta")
        bound = 1.0
        if dom is not None and dom.kind == Domain.L2_BALL:
            bound = float(np.max(np.abs(dom.center)) + dom.radius)
        return Hypentropy(beta, coord_bound=bound)
    raise DomainError(f"unknown regularizer kind {kind!r}")
