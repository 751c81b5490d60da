"""Zero-dimensional field theory: stationary points, the leading DeWitt factor and
Schwinger-Dyson identities under the Euclidean weight exp(-S / hbar).

In zero dimensions time ordering is trivial, and replacing exp(i S / hbar)
by exp(-S / hbar) turns the Schwinger-Dyson equation into
<(dS/dphi_a) F> = hbar <dF/dphi_a>: integration by parts against the weight.
All expectations are tensor-product Gauss-Legendre quadratures over a box
chosen by a tail test, refined until they stop changing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from ._poly import Poly, monomials
from .estimator import RngStream
from .report import VerificationReport, aggregate

__all__ = [
    "ToyAction",
    "SourcedAction",
    "NotNormalizableError",
    "ConvergenceError",
    "stationary_point",
    "leading_mu",
    "expectation",
    "verify_schwinger_dyson",
    "schwinger_dyson_suite",
    "generating_derivative",
    "verify_generating_derivative",
    "random_quartic_action",
    "action_from_table",
]

_GL_ORDER = 12
_TAIL_NATS = 50.0
_R_MAX = 64.0
_QUAD_RTOL = 1e-13
_MAX_POINTS = 6_000_000


class NotNormalizableError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def _fd_grad(S, x, h):
    D = x.size
    g = np.empty(D)
    for k in range(D):
        e = np.zeros(D)
        e[k] = h
        g[k] = (S(x + e) - S(x - e)) / (2 * h)
    return g


@dataclass(frozen=True, eq=False)
class ToyAction:
    """An action on R^D with its gradient and Hessian.

    ``S`` maps ``(N, D) -> (N,)``; ``grad_S`` maps ``(N, D) -> (N, D)``;
    ``hess_S`` maps a single point ``(D,) -> (D, D)``. On construction the
    derivatives are compared with central differences at 10 random points
    (relative tolerance 1e-5). ``poly`` is kept when the action came from a
    polynomial table.
    """

    dim: int
    S: Callable
    grad_S: Callable
    hess_S: Callable
    hbar: float = 1.0
    regime: str = "euclidean"
    poly: Poly | None = field(default=None, repr=False)
    validate_seed: int = 0

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.regime not in ("euclidean", "gaussian-analytic"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.regime == "gaussian-analytic" and (self.poly is None or self.poly.degree > 2):
            raise ValueError("the gaussian-analytic regime needs a polynomial action of degree <= 2")
        self._validate()

    @classmethod
    def from_poly(cls, poly: Poly, hbar: float = 1.0, regime: str = "euclidean") -> "ToyAction":
        grads = poly.gradient()
        hess = [[g.deriv(j) for j in range(poly.nvars)] for g in grads]

        def S(x):
            return poly(np.atleast_2d(x))

        def grad_S(x):
            x = np.atleast_2d(x)
            return np.stack([g(x) for g in grads], axis=-1)

        def hess_S(x):
            x = np.asarray(x, dtype=np.float64).reshape(1, -1)
            return np.array([[h(x)[0] for h in row] for row in hess])

        return cls(poly.nvars, S, grad_S, hess_S, hbar, regime, poly)

    def value(self, x) -> float:
        return float(np.asarray(self.S(np.atleast_2d(x)))[0])

    def gradient(self, x) -> np.ndarray:
        return np.asarray(self.grad_S(np.atleast_2d(x)))[0]

    def hessian(self, x) -> np.ndarray:
        return np.asarray(self.hess_S(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def _validate(self):
        rng = np.random.default_rng(self.validate_seed)
        for _ in range(10):
            x = rng.uniform(-1.5, 1.5, size=self.dim)
            h = 1e-5 * max(1.0, np.abs(x).max())
            g = self.gradient(x)
            g_fd = _fd_grad(self.value, x, h)
            H = self.hessian(x)
            H_fd = np.array([_fd_grad(lambda y, k=k: self.gradient(y)[k], x, h) for k in range(self.dim)])
            for name, a, b in (("gradient", g, g_fd), ("Hessian", H, H_fd)):
                if np.abs(a - b).max() > 1e-5 * max(1.0, np.abs(b).max()):
                    raise ValueError(f"{name} inconsistent with the action at {x}")
            if np.abs(H - H.T).max() > 1e-10 * max(1.0, np.abs(H).max()):
                raise ValueError(f"Hessian not symmetric at {x}")

    @cached_property
    def quadrature(self) -> "_Quadrature":
        return _Quadrature(self)


@dataclass(frozen=True, eq=False)
class SourcedAction:
    """S_J(phi) = S(phi) + J . phi."""

    base: ToyAction
    J: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.J, dtype=np.float64).reshape(-1)
        if J.shape != (self.base.dim,):
            raise ValueError(f"source needs {self.base.dim} components")
        object.__setattr__(self, "J", J)

    def as_action(self) -> ToyAction:
        b, J = self.base, self.J
        poly = None
        if b.poly is not None:
            poly = b.poly + sum((Poly.variable(b.dim, k, float(J[k])) for k in range(b.dim)), Poly(b.dim))
        return ToyAction(b.dim, lambda x: b.S(x) + np.atleast_2d(x) @ J,
                         lambda x: b.grad_S(x) + J, b.hess_S, b.hbar, b.regime, poly)


def stationary_point(action: ToyAction, guess, tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
    """Newton iteration (with step halving on the gradient norm) to |grad S| <= tol."""
    x = np.asarray(guess, dtype=np.float64).reshape(action.dim).copy()
    g = action.gradient(x)
    for _ in range(max_iter):
        gn = np.linalg.norm(g)
        if gn <= tol:
            return x
        H = action.hessian(x)
        if not np.all(np.isfinite(H)) or np.linalg.cond(H) > 1e14:
            raise np.linalg.LinAlgError(f"singular Hessian at iterate {x}")
        step = np.linalg.solve(H, g)
        t = 1.0
        while True:
            x_new = x - t * step
            g_new = action.gradient(x_new)
            if np.linalg.norm(g_new) < gn or t < 1e-4:
                break
            t *= 0.5
        x, g = x_new, g_new
    if np.linalg.norm(g) <= tol:
        return x
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (|grad| = {np.linalg.norm(g):.3g})")


def leading_mu(action: ToyAction, phi0, stationarity_tol: float = 1e-8) -> float:
    """|det G|^{-1/2} = |det S''(phi0)|^{1/2} with G the inverse Hessian at a stationary point."""
    phi0 = np.asarray(phi0, dtype=np.float64)
    gn = np.linalg.norm(action.gradient(phi0))
    if gn > stationarity_tol:
        raise ValueError(f"phi0 is not stationary: |grad S| = {gn:.3g}")
    H = action.hessian(phi0)
    det = np.linalg.det(H)
    if det == 0 or np.linalg.cond(H) > 1e14:
        raise np.linalg.LinAlgError("singular Hessian at the stationary point")
    return math.sqrt(abs(det))


class _Quadrature:
    """Tensor-product composite Gauss-Legendre rule for the weight exp(-S / hbar)."""

    def __init__(self, action: ToyAction):
        if action.regime != "euclidean":
            raise ValueError("quadrature needs the euclidean regime")
        self.action = action
        D = action.dim
        # coarse scan for the minimum, then the tail test
        s_min, centre = self._coarse_min()
        self.s_min = s_min
        radius = self._tail_radius(centre)
        self.lo, self.hi = centre - radius, centre + radius
        panels = 8
        prev = None
        while True:
            if (panels * _GL_ORDER) ** D > _MAX_POINTS:
                raise ConvergenceError("quadrature did not converge within the point budget")
            pts, wts = self._rule(panels)
            moments = self._probe(pts, wts)
            if prev is not None and np.all(np.abs(moments - prev) <= _QUAD_RTOL * np.abs(prev).clip(1e-300)):
                break
            prev, panels = moments, 2 * panels
        self.points, self.weights, self.panels = pts, wts, panels
        self.Z_scaled = float(wts.sum())

    def _coarse_min(self):
        D = self.action.dim
        m = {1: 2001, 2: 201, 3: 61}.get(D, 21)
        axis = np.linspace(-8.0, 8.0, m)
        grid = np.stack(np.meshgrid(*([axis] * D), indexing="ij"), axis=-1).reshape(-1, D)
        S = np.asarray(self.action.S(grid))
        i = int(np.argmin(S))
        return float(S[i]), grid[i]

    def _tail_radius(self, centre):
        a, D = self.action, self.action.dim
        r = 1.0
        while r <= _R_MAX:
            # sample the boundary of the box centre +- r
            m = 41
            axis = np.linspace(-r, r, m)
            faces = []
            for k in range(D):
                for sgn in (-1.0, 1.0):
                    sub = np.stack(np.meshgrid(*([axis] * (D - 1)), indexing="ij"), axis=-1).reshape(-1, D - 1) \
                        if D > 1 else np.zeros((1, 0))
                    face = np.insert(sub, k, sgn * r, axis=1)
                    faces.append(face)
            pts = centre + np.concatenate(faces)
            if np.min(np.asarray(a.S(pts))) - self.s_min >= _TAIL_NATS * a.hbar:
                return r
            r *= 1.25
        raise NotNormalizableError("exp(-S/hbar) does not decay within the search box; S is not confining")

    def _rule(self, panels):
        D = self.action.dim
        x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
        axes, axw = [], []
        for k in range(D):
            edges = np.linspace(self.lo[k], self.hi[k], panels + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            axes.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
            axw.append((half[:, None] * w[None, :]).ravel())
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, D)
        base = np.prod(np.stack(np.meshgrid(*axw, indexing="ij"), axis=-1).reshape(-1, D), axis=1)
        S = np.asarray(self.action.S(pts))
        return pts, base * np.exp(-(S - self.s_min) / self.action.hbar)

    def _probe(self, pts, wts):
        Z = wts.sum()
        r2 = (pts**2).sum(axis=1)
        return np.array([Z, *(np.dot(wts, r2**k) / Z for k in (1, 2, 3, 4))])

    def mean(self, values, weights=None) -> float:
        w = self.weights if weights is None else weights
        return float(np.dot(w, values) / w.sum())


def expectation(action: ToyAction, G: Callable) -> float:
    """<G> under exp(-S/hbar) / Z, with ``G`` vectorized over ``(N, D)`` points."""
    q = action.quadrature
    return q.mean(np.asarray(G(q.points)))


def verify_schwinger_dyson(action: ToyAction, F: Poly, a: int, rtol: float = 1e-8) -> VerificationReport:
    """<(dS/dphi_a) F> = hbar <dF/dphi_a>, residual relative to the size of the terms.

    The scale is max(<|dS/dphi_a F|>, hbar <|dF/dphi_a|>), so odd-symmetric
    cases where both sides vanish are still judged against a meaningful size.
    """
    if action.regime != "euclidean":
        raise ValueError("Schwinger-Dyson verification needs the euclidean regime")
    if F.nvars != action.dim:
        raise ValueError("F and the action disagree on the dimension")
    q = action.quadrature
    dS = np.asarray(action.grad_S(q.points))[:, a]
    fv = F(q.points)
    dF = F.deriv(a)(q.points)
    t1 = q.mean(dS * fv)
    t2 = action.hbar * q.mean(dF)
    scale = max(q.mean(np.abs(dS * fv)), action.hbar * q.mean(np.abs(dF)))
    resid = abs(t1 - t2)
    return VerificationReport(
        "schwinger-dyson", "Schwinger-Dyson", t1, t2, resid, abs_tol=rtol * scale,
        details={"component": a, "F": repr(F), "scale": scale, "relative_residual": resid / scale if scale else 0.0,
                 "hbar": action.hbar, "panels": q.panels},
    )


def schwinger_dyson_suite(action: ToyAction, max_degree: int = 4, rtol: float = 1e-8,
                          label: str = "") -> VerificationReport:
    """Every monomial F of degree <= max_degree and every component a."""
    cases = []
    for e in monomials(action.dim, max_degree):
        F = Poly(action.dim, {e: 1})
        for a in range(action.dim):
            cases.append(verify_schwinger_dyson(action, F, a, rtol))
    details = {"action": repr(action.poly) if action.poly is not None else label, "max_degree": max_degree}
    return aggregate("schwinger-dyson", "Schwinger-Dyson", cases, details=details)


def generating_derivative(action: SourcedAction, order: int = 1) -> np.ndarray:
    """-hbar grad_J log Z_J, from Z alone (five-point stencil in J on a fixed quadrature).

    Only ``order=1`` is implemented.
    """
    if order != 1:
        raise NotImplementedError("only the first derivative is implemented")
    full = action.as_action()
    if full.regime == "gaussian-analytic":
        return _gaussian_mean(full)
    q = full.quadrature
    hbar = full.hbar
    out = np.empty(full.dim)
    for k in range(full.dim):
        xk = q.points[:, k]
        spread = math.sqrt(max(q.mean(xk**2) - q.mean(xk) ** 2, 1e-30))
        d = 1e-3 * hbar / spread
        logZ = [math.log(np.dot(q.weights, np.exp(-c * d * xk / hbar))) for c in (-2, -1, 1, 2)]
        deriv = (logZ[0] - 8 * logZ[1] + 8 * logZ[2] - logZ[3]) / (12 * d)
        out[k] = -hbar * deriv
    return out


def _gaussian_mean(action: ToyAction) -> np.ndarray:
    # S = c + g.x + x.H.x / 2  =>  <x> = -H^{-1} g
    zero = np.zeros(action.dim)
    return -np.linalg.solve(action.hessian(zero), action.gradient(zero))


def verify_generating_derivative(action: SourcedAction, tol: float = 1e-8) -> VerificationReport:
    """-hbar grad_J log Z_J against the directly integrated <phi>_J."""
    full = action.as_action()
    via_z = generating_derivative(action)
    if full.regime == "gaussian-analytic":
        direct = _gaussian_mean(full)
    else:
        direct = np.array([expectation(full, lambda p, k=k: p[:, k]) for k in range(full.dim)])
    diff = float(np.abs(via_z - direct).max())
    return VerificationReport("generating-derivative", "inout", via_z.tolist(), direct.tolist(), diff,
                              abs_tol=tol, details={"J": action.J, "hbar": full.hbar})


def action_from_table(dim: int, terms, hbar: float = 1.0) -> ToyAction:
    """Polynomial action from ``[(exponents, coefficient), ...]``; degree <= 4, dim <= 3."""
    if not 1 <= dim <= 3:
        raise ValueError("actions are limited to 1 <= D <= 3")
    poly = Poly(dim, [(tuple(e), float(c)) for e, c in terms])
    if poly.degree > 4:
        raise ValueError("actions are limited to degree 4")
    return ToyAction.from_poly(poly, hbar)


def random_quartic_action(dim: int, stream: RngStream, hbar: float = 1.0) -> ToyAction:
    """Confining random quartic: positive diagonal quartics plus mild lower-order terms."""
    rng = stream.generator()
    terms = {}
    for k in range(dim):
        e = [0] * dim
        e[k] = 4
        terms[tuple(e)] = float(rng.uniform(0.05, 0.5))
    if dim > 1:
        for i in range(dim):
            for j in range(i + 1, dim):
                e = [0] * dim
                e[i] = e[j] = 2
                terms[tuple(e)] = float(rng.uniform(0.0, 0.2))
    for e in monomials(dim, 3):
        d = sum(e)
        if d == 0:
            continue
        width = {1: 0.5, 2: 1.0, 3: 0.2}[d]
        c = float(rng.uniform(-width, width))
        if d == 2 and max(e) == 2:
            c = 0.5 * abs(c) + 0.1
        terms[e] = terms.get(e, 0.0) + c
    return ToyAction.from_poly(Poly(dim, terms), hbar)
