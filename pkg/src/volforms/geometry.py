"""Lie derivatives of metrics and symplectic forms in a single chart, and the
divergence D(X) of a vector field with respect to a top form.

For a top form mu dx^1...dx^D, L_X(mu dx) = D(X) mu dx with
D(X) = X^a_{,a} + X^a (log|mu|)_{,a}. The Riemannian volume |det g|^{1/2}
and the symplectic volume Pf(Omega) are characterized by
D(X) = (1/2) Tr(F^{-1} L_X F) for F = g or Omega, for every vector field X.

Index conventions: ``field(x)[a, b]`` is F_{ab}; ``field_partials(x)[a, b, c]``
is d_c F_{ab}; a vector field's Jacobian ``J[a, b]`` is d_b X^a. Components
are full (non-strict) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._poly import Poly, random_poly
from .estimator import RngStream
from .report import VerificationReport

__all__ = [
    "ChartedManifold",
    "VectorFieldOnChart",
    "ScalarField",
    "TopFormDensity",
    "DerivativeError",
    "lie_metric",
    "lie_symplectic",
    "lie_symplectic_three_term",
    "divergence_D",
    "trace_term",
    "trace_term_naive",
    "christoffel",
    "contracted_christoffel",
    "volume_density",
    "sample_points",
    "verify_divergence_identity",
    "pfaffian",
    "verify_dx_algebra",
    "lie_bracket",
    "hamiltonian_field",
    "poly_vector_field",
    "poly_scalar_field",
    "random_vector_field",
    "builtin_manifold",
    "BUILTIN_MANIFOLDS",
    "killing_fields",
]

_EPS = np.finfo(np.float64).eps
ANALYTIC_TOL = 1e-7
FD_TOL = 1e-5
_DEGENERATE = 1e-10
_MAX_RESAMPLE = 100


class DerivativeError(ValueError):
    pass


def _fd_step(x: np.ndarray) -> np.ndarray:
    return _EPS ** (1.0 / 3.0) * np.maximum(1.0, np.abs(x))


def fd_partials(f: Callable, x) -> np.ndarray:
    """Central differences; the derivative direction is the last axis of the output."""
    x = np.asarray(x, dtype=np.float64)
    h = _fd_step(x)
    cols = []
    for c in range(x.size):
        e = np.zeros_like(x)
        e[c] = h[c]
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h[c]))
    return np.stack(cols, axis=-1)


def _fd5(f: Callable, x, h: float = 1e-3) -> np.ndarray:
    # five-point stencil, used for second-level derivatives of analytic quantities
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for c in range(x.size):
        e = np.zeros_like(x)
        e[c] = h
        vals = [np.asarray(f(x + k * e)) for k in (-2, -1, 1, 2)]
        cols.append((vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h))
    return np.stack(cols, axis=-1)


@dataclass(frozen=True, eq=False)
class ScalarField:
    f: Callable
    grad: Callable | None = None
    hess: Callable | None = None

    def __call__(self, x) -> float:
        return float(self.f(np.asarray(x, dtype=np.float64)))

    def gradient(self, x) -> np.ndarray:
        if self.grad is not None:
            return np.asarray(self.grad(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        return fd_partials(self, x)

    def hessian(self, x) -> np.ndarray:
        if self.hess is not None:
            return np.asarray(self.hess(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        return fd_partials(self.gradient, x)


@dataclass(frozen=True, eq=False)
class VectorFieldOnChart:
    X: Callable
    X_partials: Callable | None = None
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.X(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    @property
    def analytic(self) -> bool:
        return self.X_partials is not None

    def jacobian(self, x) -> np.ndarray:
        """``J[a, b] = d_b X^a``."""
        if self.X_partials is not None:
            return np.asarray(self.X_partials(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        return fd_partials(self, x)

    def check_partials(self, x, tol: float = FD_TOL):
        if self.X_partials is None:
            return
        J, J_fd = self.jacobian(x), fd_partials(self, x)
        err = np.abs(J - J_fd).max()
        if err > tol * max(1.0, np.abs(J).max()):
            raise DerivativeError(f"vector field partials disagree with finite differences by {err:.3g} at {x}")


@dataclass(frozen=True, eq=False)
class TopFormDensity:
    mu: Callable
    mu_partials: Callable | None = None

    def __call__(self, x) -> float:
        return float(self.mu(np.asarray(x, dtype=np.float64)))

    def gradient(self, x) -> np.ndarray:
        if self.mu_partials is not None:
            return np.asarray(self.mu_partials(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        return fd_partials(self, x)

    def log_gradient(self, x) -> np.ndarray:
        m = self(x)
        if m == 0:
            raise ValueError(f"top form density vanishes at {x}")
        return self.gradient(x) / m


@dataclass(frozen=True, eq=False)
class ChartedManifold:
    """A single chart carrying a metric (riemannian) or a symplectic form.

    ``density`` optionally supplies an analytic volume density; otherwise
    ``volume_density`` builds one from the field.
    """

    dim: int
    kind: str
    field: Callable
    field_partials: Callable | None = None
    domain_box: tuple = ((-1.0, 1.0), (-1.0, 1.0))
    name: str = ""
    density: TopFormDensity | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("riemannian", "symplectic"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "symplectic" and self.dim % 2:
            raise ValueError("a symplectic chart needs even dimension")
        box = np.asarray(self.domain_box, dtype=np.float64)
        if box.shape != (self.dim, 2) or np.any(box[:, 0] >= box[:, 1]):
            raise ValueError("domain_box must be D pairs (low, high) with low < high")
        object.__setattr__(self, "domain_box", box)

    @property
    def backend(self) -> str:
        return "analytic" if self.field_partials is not None else "fd"

    @property
    def tol(self) -> float:
        return ANALYTIC_TOL if self.backend == "analytic" else FD_TOL

    def F(self, x) -> np.ndarray:
        F = np.asarray(self.field(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        self._check_shape(F, x)
        return F

    def dF(self, x) -> np.ndarray:
        """``dF[a, b, c] = d_c F_{ab}``."""
        if self.field_partials is not None:
            return np.asarray(self.field_partials(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        return fd_partials(self.F, x)

    def _check_shape(self, F, x):
        if F.shape != (self.dim, self.dim):
            raise ValueError(f"field has shape {F.shape} at {x}")
        sym = F - F.T if self.kind == "riemannian" else F + F.T
        if np.abs(sym).max() > 1e-12 * max(1.0, np.abs(F).max()):
            what = "symmetric" if self.kind == "riemannian" else "antisymmetric"
            raise ValueError(f"field is not {what} at {x}")

    def degenerate(self, x) -> bool:
        F = self.F(x)
        return abs(np.linalg.det(F)) <= _DEGENERATE * np.linalg.norm(F, 2) ** self.dim

    def check_closed(self, x):
        """dOmega = 0: Omega_{bc,a} + Omega_{ca,b} + Omega_{ab,c} = 0."""
        dO = self.dF(x)
        cyc = np.einsum("bca->abc", dO) + np.einsum("cab->abc", dO) + dO
        err = np.abs(cyc).max()
        tol = self.tol * max(1.0, np.abs(dO).max())
        if err > tol:
            raise DerivativeError(f"symplectic form is not closed at {np.asarray(x).tolist()} (residual {err:.3g})")


def lie_metric(M: ChartedManifold, X: VectorFieldOnChart, x) -> np.ndarray:
    """(L_X g)_{ab} = X^c g_{ab,c} + g_{cb} X^c_{,a} + g_{ac} X^c_{,b}."""
    if M.kind != "riemannian":
        raise ValueError("lie_metric needs a riemannian chart")
    g, dg, v, J = M.F(x), M.dF(x), X(x), X.jacobian(x)
    L = np.einsum("c,abc->ab", v, dg) + np.einsum("cb,ca->ab", g, J) + np.einsum("ac,cb->ab", g, J)
    return 0.5 * (L + L.T)


def _lowered(M, X, x):
    # X_a = X^b Omega_{ba} and its partials X_{a,c}
    O, dO, v, J = M.F(x), M.dF(x), X(x), X.jacobian(x)
    low = v @ O
    dlow = np.einsum("bc,ba->ac", J, O) + np.einsum("b,bac->ac", v, dO)
    return low, dlow


def lie_symplectic(M: ChartedManifold, X: VectorFieldOnChart, x) -> np.ndarray:
    """(L_X Omega)_{ab} = X_{b,a} - X_{a,b} with X_a = X^b Omega_{ba}.

    The reduced form relies on dOmega = 0, which is checked at ``x``; the
    result is cross-checked against the unreduced three-term formula.
    """
    if M.kind != "symplectic":
        raise ValueError("lie_symplectic needs a symplectic chart")
    M.check_closed(x)
    _, dlow = _lowered(M, X, x)
    L = dlow.T - dlow
    full = lie_symplectic_three_term(M, X, x)
    err = np.abs(L - full).max()
    if err > M.tol * max(1.0, np.abs(full).max()):
        raise DerivativeError(f"reduced and three-term Lie derivatives differ by {err:.3g} at {x}")
    return L


def lie_symplectic_three_term(M: ChartedManifold, X: VectorFieldOnChart, x) -> np.ndarray:
    """X^c Omega_{ab,c} + Omega_{cb} X^c_{,a} + Omega_{ac} X^c_{,b}."""
    O, dO, v, J = M.F(x), M.dF(x), X(x), X.jacobian(x)
    return np.einsum("c,abc->ab", v, dO) + np.einsum("cb,ca->ab", O, J) + np.einsum("ac,cb->ab", O, J)


def divergence_D(M: ChartedManifold, X: VectorFieldOnChart, mu: TopFormDensity, x) -> float:
    """D(X) = X^a_{,a} + X^a (log|mu|)_{,a}."""
    return float(np.trace(X.jacobian(x)) + X(x) @ mu.log_gradient(x))


def trace_term(M: ChartedManifold, X: VectorFieldOnChart, x) -> float:
    """(1/2) Tr(F^{-1} L_X F) from the closed index formulas.

    Riemannian: (1/2)(g^{ba} X^c g_{ab,c} + 2 X^a_{,a}).
    Symplectic: Omega^{ca} X_{c,a} with Omega^{ca} the inverse matrix.
    """
    F = M.F(x)
    if abs(np.linalg.det(F)) == 0:
        raise np.linalg.LinAlgError(f"singular field at {x}")
    Finv = np.linalg.inv(F)
    if M.kind == "riemannian":
        v, J, dg = X(x), X.jacobian(x), M.dF(x)
        return float(0.5 * (np.einsum("ba,c,abc->", Finv, v, dg) + 2.0 * np.trace(J)))
    _, dlow = _lowered(M, X, x)
    return float(np.einsum("ca,ca->", Finv, dlow))


def trace_term_naive(M: ChartedManifold, X: VectorFieldOnChart, x) -> float:
    """0.5 * trace(inv(F) @ L_X F) by plain matrix products."""
    L = lie_metric(M, X, x) if M.kind == "riemannian" else lie_symplectic(M, X, x)
    return float(0.5 * np.trace(np.linalg.solve(M.F(x), L)))


def christoffel(M: ChartedManifold, x) -> np.ndarray:
    """``G[a, b, c] = Gamma^a_{bc} = (1/2) g^{ad} (g_{db,c} + g_{dc,b} - g_{bc,d})``."""
    if M.kind != "riemannian":
        raise ValueError("Christoffel symbols need a metric")
    ginv, dg = np.linalg.inv(M.F(x)), M.dF(x)
    low = dg + np.einsum("dcb->dbc", dg) - np.einsum("bcd->dbc", dg)
    return 0.5 * np.einsum("ad,dbc->abc", ginv, low)


def contracted_christoffel(M: ChartedManifold, x) -> np.ndarray:
    """Gamma^a_{ac}, from the full symbols."""
    return np.einsum("aac->c", christoffel(M, x))


def pfaffian(A) -> float:
    """Pfaffian by recursive expansion along the first row (D <= 8); Pf([[0,1],[-1,0]]) = 1."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("pfaffian needs a square matrix")
    n = A.shape[0]
    if n % 2:
        raise ValueError("pfaffian needs even dimension")
    if n > 8:
        raise ValueError("recursive pfaffian is limited to D <= 8")
    if np.abs(A + A.T).max() > 1e-12 * max(1.0, np.abs(A).max()):
        raise ValueError("pfaffian needs an antisymmetric matrix")
    return _pf(A)


def _pf(A):
    n = A.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    for j in range(1, n):
        if A[0, j] == 0:
            continue
        keep = [k for k in range(1, n) if k != j]
        total += (-1) ** (j + 1) * A[0, j] * _pf(A[np.ix_(keep, keep)])
    return total


def volume_density(M: ChartedManifold) -> TopFormDensity:
    """The manifold's analytic density if it has one, else |det g|^{1/2} or Pf(Omega)
    with central-difference partials."""
    if M.density is not None:
        return M.density
    if M.kind == "riemannian":
        return TopFormDensity(lambda x: math.sqrt(abs(np.linalg.det(M.F(x)))))
    return TopFormDensity(lambda x: pfaffian(M.F(x)))


def sample_points(M: ChartedManifold, n_points: int, stream: RngStream) -> np.ndarray:
    """Uniform points in the domain box, redrawing degenerate ones (up to 100 times each)."""
    rng = stream.generator()
    lo, hi = M.domain_box[:, 0], M.domain_box[:, 1]
    out = np.empty((n_points, M.dim))
    for i in range(n_points):
        for _ in range(_MAX_RESAMPLE):
            x = rng.uniform(lo, hi)
            if not M.degenerate(x):
                break
        else:
            raise ValueError(f"no nondegenerate point found after {_MAX_RESAMPLE} draws")
        out[i] = x
    return out


def verify_divergence_identity(M: ChartedManifold, X: VectorFieldOnChart, n_points: int, stream: RngStream,
                               mu: TopFormDensity | None = None, tol: float | None = None) -> VerificationReport:
    """D(X) for the field's volume form equals (1/2) Tr(F^{-1} L_X F) at random points.

    Also checked at each point: the naive matrix-product trace, and in the
    Riemannian case the covariant divergence Gamma^a_{ac} X^c + X^a_{,a}.
    """
    mu = mu or volume_density(M)
    tol = M.tol if tol is None else tol
    pts = sample_points(M, n_points, stream)
    worst, worst_i = 0.0, -1
    max_lhs = max_rhs = 0.0
    for i, x in enumerate(pts):
        X.check_partials(x)
        lhs = divergence_D(M, X, mu, x)
        rhs = trace_term(M, X, x)
        checks = [lhs - rhs, rhs - trace_term_naive(M, X, x)]
        if M.kind == "riemannian":
            cov = float(contracted_christoffel(M, x) @ X(x) + np.trace(X.jacobian(x)))
            checks.append(rhs - cov)
        scale = max(1.0, abs(lhs), abs(rhs))
        err = max(abs(c) for c in checks) / scale
        max_lhs, max_rhs = max(max_lhs, abs(lhs)), max(max_rhs, abs(rhs))
        if err > worst or worst_i < 0:
            worst, worst_i = err, i
    equation = "Divg" if M.kind == "riemannian" else "DivO"
    return VerificationReport(
        f"divergence-{M.kind}", equation, max_lhs, max_rhs, worst, abs_tol=tol,
        details={"manifold": M.name, "field": X.label, "backend": M.backend, "n_points": n_points,
                 "worst_point": pts[worst_i], "max_abs_divergence": max_lhs, "max_abs_trace": max_rhs},
        seed=stream.seed,
    )


def lie_bracket(X: VectorFieldOnChart, Y: VectorFieldOnChart) -> VectorFieldOnChart:
    """[X, Y]^a = X^b d_b Y^a - Y^b d_b X^a; its Jacobian by a five-point stencil."""
    if not (X.analytic and Y.analytic):
        raise DerivativeError("the bracket needs analytic partials of both fields")

    def br(x):
        return Y.jacobian(x) @ X(x) - X.jacobian(x) @ Y(x)

    return VectorFieldOnChart(br, lambda x: _fd5(br, x), label=f"[{X.label},{Y.label}]")


def verify_dx_algebra(M: ChartedManifold, X: VectorFieldOnChart, Y: VectorFieldOnChart, f: ScalarField,
                      n_points: int, stream: RngStream, mu: TopFormDensity | None = None,
                      tol: float = ANALYTIC_TOL) -> VerificationReport:
    """D([X,Y]) = X(D(Y)) - Y(D(X)) and D(fX) = f D(X) + X(f) at random points."""
    if not (X.analytic and Y.analytic and f.grad is not None):
        raise DerivativeError("the D(X) algebra check needs analytic partials for X, Y and f")
    mu = mu or volume_density(M)
    bracket = lie_bracket(X, Y)

    def fX_jac(x):
        return f(x) * X.jacobian(x) + np.outer(X(x), f.gradient(x))

    fX = VectorFieldOnChart(lambda x: f(x) * X(x), fX_jac)
    pts = sample_points(M, n_points, stream)
    worst, worst_i, worst_which = 0.0, 0, ""
    for i, x in enumerate(pts):
        dDY = _fd5(lambda y: divergence_D(M, Y, mu, y), x)
        dDX = _fd5(lambda y: divergence_D(M, X, mu, y), x)
        lhs1 = divergence_D(M, bracket, mu, x)
        rhs1 = float(X(x) @ dDY - Y(x) @ dDX)
        lhs2 = divergence_D(M, fX, mu, x)
        rhs2 = f(x) * divergence_D(M, X, mu, x) + float(X(x) @ f.gradient(x))
        for which, a, b in (("bracket", lhs1, rhs1), ("product", lhs2, rhs2)):
            err = abs(a - b) / max(1.0, abs(a), abs(b))
            if err > worst:
                worst, worst_i, worst_which = err, i, which
    return VerificationReport(
        "dx-algebra", "fourthree", None, None, worst, abs_tol=tol,
        details={"manifold": M.name, "n_points": n_points, "worst_point": pts[worst_i], "worst_identity": worst_which},
        seed=stream.seed,
    )


def hamiltonian_field(M: ChartedManifold, H: ScalarField) -> VectorFieldOnChart:
    """X^a = H_{,b} Omega^{ba} with Omega^{ba} the inverse matrix, so that X_a = H_{,a}."""
    if M.kind != "symplectic":
        raise ValueError("Hamiltonian fields need a symplectic chart")

    def X(x):
        return H.gradient(x) @ np.linalg.inv(M.F(x))

    def J(x):
        Oinv = np.linalg.inv(M.F(x))
        dOinv = -np.einsum("ab,bcd,ce->aed", Oinv, M.dF(x), Oinv)
        return np.einsum("bd,ba->ad", H.hessian(x), Oinv) + np.einsum("b,bad->ad", H.gradient(x), dOinv)

    return VectorFieldOnChart(X, J, label="hamiltonian")


def poly_scalar_field(p: Poly) -> ScalarField:
    grads = p.gradient()
    hess = [[g.deriv(j) for j in range(p.nvars)] for g in grads]

    def at(q, x):
        return q(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]

    return ScalarField(lambda x: at(p, x), lambda x: np.array([at(g, x) for g in grads]),
                       lambda x: np.array([[at(h, x) for h in row] for row in hess]))


def poly_vector_field(components: list[Poly], label: str = "") -> VectorFieldOnChart:
    D = len(components)
    jac = [[c.deriv(b) for b in range(D)] for c in components]

    def at(q, x):
        return q(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]

    return VectorFieldOnChart(lambda x: np.array([at(c, x) for c in components]),
                              lambda x: np.array([[at(q, x) for q in row] for row in jac]), label=label)


def random_vector_field(dim: int, degree: int, rng: np.random.Generator, label: str = "random") -> VectorFieldOnChart:
    comps = [random_poly(dim, degree, rng) for _ in range(dim)]
    return poly_vector_field(comps, label=label)


_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _flat2(analytic):
    return ChartedManifold(
        2, "riemannian", lambda x: np.eye(2), (lambda x: np.zeros((2, 2, 2))) if analytic else None,
        ((-1.0, 1.0), (-1.0, 1.0)), "flat2",
        TopFormDensity(lambda x: 1.0, (lambda x: np.zeros(2)) if analytic else None))


def _sphere2(analytic):
    # coordinates (theta, phi), away from the poles
    def g(x):
        return np.diag([1.0, math.sin(x[0]) ** 2])

    def dg(x):
        out = np.zeros((2, 2, 2))
        out[1, 1, 0] = 2 * math.sin(x[0]) * math.cos(x[0])
        return out

    return ChartedManifold(
        2, "riemannian", g, dg if analytic else None, ((0.3, math.pi - 0.3), (-math.pi, math.pi)), "sphere2",
        TopFormDensity(lambda x: math.sin(x[0]), (lambda x: np.array([math.cos(x[0]), 0.0])) if analytic else None))


def _u(x):
    return 0.3 * x[0] + 0.2 * x[1] ** 2 - 0.1 * x[0] * x[1]


def _du(x):
    return np.array([0.3 - 0.1 * x[1], 0.4 * x[1] - 0.1 * x[0]])


def _conformal2(analytic):
    def g(x):
        return math.exp(2 * _u(x)) * np.eye(2)

    def dg(x):
        return math.exp(2 * _u(x)) * np.einsum("ab,c->abc", np.eye(2), 2 * _du(x))

    return ChartedManifold(
        2, "riemannian", g, dg if analytic else None, ((-1.0, 1.0), (-1.0, 1.0)), "conformal2",
        TopFormDensity(lambda x: math.exp(2 * _u(x)),
                       (lambda x: 2 * _du(x) * math.exp(2 * _u(x))) if analytic else None))


def _darboux2(analytic):
    # coordinates (p, q), Omega = dp ^ dq
    return ChartedManifold(
        2, "symplectic", lambda x: _J2.copy(), (lambda x: np.zeros((2, 2, 2))) if analytic else None,
        ((-1.0, 1.0), (-1.0, 1.0)), "darboux2",
        TopFormDensity(lambda x: 1.0, (lambda x: np.zeros(2)) if analytic else None))


def _nonconstant_symplectic2(analytic):
    def dO(x):
        out = np.zeros((2, 2, 2))
        out[:, :, 1] = 2 * x[1] * _J2
        return out

    return ChartedManifold(
        2, "symplectic", lambda x: (1 + x[1] ** 2) * _J2, dO if analytic else None,
        ((-1.0, 1.0), (-1.0, 1.0)), "nonconstant-symplectic2",
        TopFormDensity(lambda x: 1 + x[1] ** 2, (lambda x: np.array([0.0, 2 * x[1]])) if analytic else None))


BUILTIN_MANIFOLDS = {
    "flat2": _flat2,
    "sphere2": _sphere2,
    "conformal2": _conformal2,
    "darboux2": _darboux2,
    "nonconstant-symplectic2": _nonconstant_symplectic2,
}


def builtin_manifold(name: str, backend: str = "analytic") -> ChartedManifold:
    """One of ``flat2``, ``sphere2``, ``conformal2``, ``darboux2``, ``nonconstant-symplectic2``.

    ``backend="fd"`` drops every analytic partial (field and density) so all
    derivatives come from central differences.
    """
    if name not in BUILTIN_MANIFOLDS:
        raise KeyError(f"unknown manifold {name!r}; choose from {sorted(BUILTIN_MANIFOLDS)}")
    if backend not in ("analytic", "fd"):
        raise ValueError(f"unknown backend {backend!r}")
    return BUILTIN_MANIFOLDS[name](backend == "analytic")


def killing_fields(name: str) -> list[VectorFieldOnChart]:
    """Known Killing fields of the Riemannian built-ins (analytic partials)."""
    if name == "sphere2":
        rot = VectorFieldOnChart(lambda x: np.array([0.0, 1.0]), lambda x: np.zeros((2, 2)), "d_phi")

        def tilt(x):
            th, ph = x
            return np.array([-math.sin(ph), -math.cos(ph) * math.cos(th) / math.sin(th)])

        def tilt_jac(x):
            th, ph = x
            s, c = math.sin(th), math.cos(th)
            return np.array([[0.0, -math.cos(ph)],
                             [math.cos(ph) / s**2, math.sin(ph) * c / s]])

        return [rot, VectorFieldOnChart(tilt, tilt_jac, "tilt")]
    if name == "flat2":
        return [
            VectorFieldOnChart(lambda x: np.array([1.0, 0.0]), lambda x: np.zeros((2, 2)), "d_x"),
            VectorFieldOnChart(lambda x: np.array([-x[1], x[0]]), lambda x: np.array([[0.0, -1.0], [1.0, 0.0]]),
                               "rotation"),
        ]
    raise KeyError(f"no Killing fields recorded for {name!r}")
