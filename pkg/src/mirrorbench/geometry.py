"""Feasible domains and projection operators.

Two compact convex domains are supported: the probability simplex and an
l2 ball.  Closed-form projections exist for the Euclidean geometry on both
and for the entropic geometry on the simplex; every other regularizer/domain
pair goes through either a separable dual-space solver (hyperbolic-entropy
maps) or the generic numeric Bregman projector.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DomainError

_EXP_CLIP = 700.0  # sinh/exp overflow just above this in float64


def _as_vector(y, name: str = "y") -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DomainError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or Inf")
    return arr


class Domain:
    """A compact convex feasible set with projection and diameter metadata."""

    SIMPLEX = "simplex"
    L2_BALL = "l2_ball"

    def __init__(self, kind: str, dim: int, center: np.ndarray | None = None,
                 radius: float = 1.0):
        if dim < 1:
            raise DomainError("dimension must be >= 1")
        self.kind = kind
        self.dim = int(dim)
        if kind == self.L2_BALL:
            self.center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
            if self.center.shape != (dim,):
                raise DomainError("center must have the domain's dimension")
            if radius <= 0:
                raise DomainError("radius must be positive")
            self.radius = float(radius)
        elif kind == self.SIMPLEX:
            self.center = None
            self.radius = None
        else:
            raise DomainError(f"unknown domain kind {kind!r}")

    @classmethod
    def simplex(cls, dim: int) -> "Domain":
        return cls(cls.SIMPLEX, dim)

    @classmethod
    def l2_ball(cls, dim: int, center=None, radius: float = 1.0) -> "Domain":
        return cls(cls.L2_BALL, dim, center=center, radius=radius)

    @property
    def diameter_l2(self) -> float:
        if self.kind == self.SIMPLEX:
            return float(np.sqrt(2.0))
        return 2.0 * self.radius

    @property
    def diameter_l1(self) -> float:
        if self.kind == self.SIMPLEX:
            return 2.0
        return 2.0 * self.radius * np.sqrt(self.dim)

    def start_point(self) -> np.ndarray:
        """Canonical initial point: uniform on the simplex, center of the ball."""
        if self.kind == self.SIMPLEX:
            return np.full(self.dim, 1.0 / self.dim)
        return self.center.copy()

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        if self.kind == self.SIMPLEX:
            return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def project_euclidean(self, y) -> np.ndarray:
        if self.kind == self.SIMPLEX:
            return project_simplex_euclidean(y)
        return project_ball_l2(y, self.center, self.radius)

    def linear_minimizer(self, g) -> np.ndarray:
        """argmin over the domain of <g, x>; deterministic tie-breaking."""
        g = _as_vector(g, "g")
        if self.kind == self.SIMPLEX:
            out = np.zeros(self.dim)
            out[int(np.argmin(g))] = 1.0
            return out
        n = np.linalg.norm(g)
        if n == 0.0:
            return self.center.copy()
        return self.center - self.radius * g / n

    def support_value(self, g) -> float:
        """sup over the domain of |<g, x>|."""
        g = _as_vector(g, "g")
        if self.kind == self.SIMPLEX:
            return float(np.max(np.abs(g)))
        return float(abs(g @ self.center) + self.radius * np.linalg.norm(g))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n points drawn uniformly from the domain, stacked row-wise."""
        if self.kind == self.SIMPLEX:
            return rng.dirichlet(np.ones(self.dim), size=n)
        z = rng.standard_normal((n, self.dim))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        r = self.radius * rng.random(n) ** (1.0 / self.dim)
        return self.center + z * r[:, None]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Domain) or self.kind != other.kind or self.dim != other.dim:
            return False
        if self.kind == self.L2_BALL:
            return bool(np.array_equal(self.center, other.center) and self.radius == other.radius)
        return True

    def __repr__(self) -> str:
        if self.kind == self.SIMPLEX:
            return f"Domain.simplex({self.dim})"
        return f"Domain.l2_ball({self.dim}, radius={self.radius})"


def project_simplex_euclidean(y) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort/threshold rule: sort y descending, find the largest prefix whose
    shifted entries stay positive, and return max(y + lam, 0).  The stable
    sort keeps ties in original index order, so the output is deterministic.
    """
    y = _as_vector(y)
    u = -np.sort(-y, kind="stable")
    css = np.cumsum(u)
    j = np.arange(1, y.size + 1)
    rho = np.nonzero(u + (1.0 - css) / j > 0.0)[0][-1]
    lam = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(y + lam, 0.0)


def project_ball_l2(y, center, radius: float) -> np.ndarray:
    """Euclidean projection onto the ball {x : ||x - center|| <= radius}."""
    y = _as_vector(y)
    center = np.asarray(center, dtype=float)
    if radius <= 0:
        raise DomainError("radius must be positive")
    d = y - center
    n = np.linalg.norm(d)
    if n <= radius:
        return y.copy()
    return center + radius * d / n


def project_simplex_entropic(y) -> np.ndarray:
    """Bregman projection onto the simplex under negative entropy.

    For strictly positive y this is plain l1 normalization.
    """
    y = _as_vector(y)
    if np.any(y <= 0.0):
        raise DomainError("entropic projection requires strictly positive input")
    return y / y.sum()


def bregman_project_numeric(reg, y, dom: Domain, tol: float = 1e-10,
                            max_iter: int = 10000) -> np.ndarray:
    """Numeric Bregman projection of y onto dom by projected gradient descent.

    Minimizes z -> B_reg(z, y) with backtracking line search (halving from 1.0)
    and stops when the gradient-mapping norm drops below tol.  Fallback for
    regularizer/domain pairs without a closed form.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    y = _as_vector(y)
    if dom.contains(y, tol=1e-12):
        # B(y, y) = 0 is the global minimum.
        return y.copy()
    theta = reg.mirror_map(y)
    return _descend_bregman(reg, theta, dom, tol, max_iter)


def _descend_bregman(reg, theta: np.ndarray, dom: Domain, tol: float,
                     max_iter: int) -> np.ndarray:
    # minimizing h(z) = reg.value(z) - <theta, z> over dom is equivalent to
    # minimizing B_reg(z, y) with theta = mirror_map(y), and never needs the
    # (possibly overflowing) primal point y itself.
    z = dom.start_point()
    h = reg.value(z) - float(theta @ z)
    gm_norm = np.inf
    for _ in range(max_iter):
        g = reg.mirror_map(z) - theta
        step = 1.0
        while True:
            zn = dom.project_euclidean(z - step * g)
            gm = (z - zn) / step
            hn = reg.value(zn) - float(theta @ zn)
            if hn <= h - 0.5 * step * float(gm @ gm) or step < 1e-18:
                break
            step *= 0.5
        z, h = zn, hn
        gm_norm = float(np.linalg.norm(gm))
        if gm_norm < tol:
            return z
    raise ConvergenceError("numeric Bregman projection did not converge", gm_norm)


class BregmanProjector:
    """Bregman projection onto a domain, fed with dual-space points.

    ``from_dual(theta)`` returns argmin over the domain of
    ``reg.value(z) - <theta, z>``, which equals the Bregman projection of
    ``mirror_inverse(theta)``.  Working in dual coordinates avoids
    materializing exploding primal points for entropy-like maps.
    """

    def __init__(self, reg, dom: Domain):
        self.reg = reg
        self.dom = dom
        self._mu_warm = 1.0
        self._z_warm: np.ndarray | None = None
        key = (reg.kind, dom.kind)
        if key == ("quadratic", Domain.SIMPLEX):
            self._impl = self._quad_simplex
        elif key == ("quadratic", Domain.L2_BALL):
            self._impl = self._quad_ball
        elif key == ("neg_entropy", Domain.SIMPLEX):
            self._impl = self._entropy_simplex
        elif key == ("hypentropy", Domain.SIMPLEX):
            self._impl = self._hyp_simplex
        elif key == ("hypentropy", Domain.L2_BALL):
            self._impl = self._hyp_ball
        else:
            self._impl = self._numeric

    def from_dual(self, theta: np.ndarray) -> np.ndarray:
        return self._impl(np.asarray(theta, dtype=float))

    def from_point(self, y) -> np.ndarray:
        return self.from_dual(self.reg.mirror_map(_as_vector(y)))

    # -- closed forms ------------------------------------------------------

    def _quad_simplex(self, theta):
        return project_simplex_euclidean(theta)

    def _quad_ball(self, theta):
        return project_ball_l2(theta, self.dom.center, self.dom.radius)

    def _entropy_simplex(self, theta):
        # normalize(exp(theta - 1)) computed in log-space
        w = np.exp(theta - theta.max())
        return w / w.sum()

    # -- separable dual solvers for the hyperbolic-entropy map --------------

    def _hyp_simplex(self, theta, tol: float = 1e-12, max_iter: int = 200):
        beta = self.reg.beta
        hi = float(theta.max())
        lo = hi - float(np.arcsinh(1.0 / beta))
        lam = 0.5 * (lo + hi)
        for _ in range(max_iter):
            arg = np.maximum(np.minimum(theta - lam, _EXP_CLIP), 0.0)
            g = beta * np.sinh(arg).sum() - 1.0
            if abs(g) < tol:
                break
            if g > 0.0:
                lo = lam
            else:
                hi = lam
            dg = -beta * float(np.sum(np.cosh(arg[arg > 0.0])))
            nxt = lam - g / dg if dg != 0.0 else np.inf
            lam = nxt if lo < nxt < hi else 0.5 * (lo + hi)
        arg = np.maximum(np.minimum(theta - lam, _EXP_CLIP), 0.0)
        z = beta * np.sinh(arg)
        return z / z.sum()

    def _hyp_ball(self, theta, tol: float = 1e-11, max_iter: int = 100):
        beta = self.reg.beta
        c, r = self.dom.center, self.dom.radius
        zu = beta * np.sinh(np.clip(theta, -_EXP_CLIP, _EXP_CLIP))
        d = zu - c
        n = float(np.linalg.norm(d))
        if n <= r:
            return zu
        z = self._z_warm if self._z_warm is not None else c + r * d / n
        mu = self._mu_warm

        def inner(mu, z):
            # coordinatewise Newton on arcsinh(z/beta) + mu (z - c) = theta
            for _ in range(60):
                f = np.arcsinh(z / beta) + mu * (z - c) - theta
                fp = 1.0 / np.sqrt(z * z + beta * beta) + mu
                step = f / fp
                z = z - step
                if np.max(np.abs(step)) < 1e-13 * (1.0 + np.max(np.abs(z))):
                    break
            return z

        mu_lo, mu_hi = 0.0, max(mu, 1e-12)
        z_hi = inner(mu_hi, z)
        while np.linalg.norm(z_hi - c) > r and mu_hi < 1e18:
            mu_lo, mu_hi = mu_hi, 2.0 * mu_hi
            z_hi = inner(mu_hi, z_hi)
        z = z_hi
        mu = mu_hi
        for _ in range(max_iter):
            h = float(np.linalg.norm(z - c)) - r
            if abs(h) < tol * max(1.0, r):
                break
            if h > 0.0:
                mu_lo = mu
            else:
                mu_hi = mu
            fp = 1.0 / np.sqrt(z * z + beta * beta) + mu
            zc = z - c
            dh = -float((zc * zc / fp).sum()) / float(np.linalg.norm(zc))
            nxt = mu - h / dh
            mu = nxt if mu_lo < nxt < mu_hi else 0.5 * (mu_lo + mu_hi)
            z = inner(mu, z)
        self._mu_warm, self._z_warm = mu, z.copy()
        zc = z - c
        n = float(np.linalg.norm(zc))
        if n > r:
            z = c + r * zc / n
        return z

    def _numeric(self, theta, tol: float = 1e-9):
        return _descend_bregman(self.reg, theta, self.dom, tol, 10000)


def bregman_projector(reg, dom: Domain) -> BregmanProjector:
    """Projection operator for the given regularizer/domain pair."""
    return BregmanProjector(reg, dom)
