"""Finite-dimensional Gaussian (s = 1) and Fresnel (s = i) Fourier identities.

The volume element ``Dx = nu dx^1...dx^D`` is fixed by requiring

    int Dx exp(-(pi/s) x.Q.x - 2 pi i x'.x) = exp(-s pi x'.W.x'),   W = Q^{-1}.

For s = 1 this gives nu = det(Q)^{1/2}. For general s we use
nu = prod_j (lambda_j / s)^{1/2} over the eigenvalues of Q, principal branch
per factor; for positive-definite Q this equals s^{-D/2} det(Q)^{1/2}.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from .estimator import RngStream
from .report import DEFAULT_SIGMA, VerificationReport, aggregate, against_exact

__all__ = [
    "GaussianSpec",
    "QuadratureError",
    "make_spec",
    "dx_normalization",
    "fourier_rhs",
    "fourier_lhs_quadrature",
    "fourier_lhs_closed_form",
    "verify_fourier",
    "covariance_check",
    "random_spd",
    "write_quadrature_csv",
]

_SYM_TOL = 1e-12
_EIG_FLOOR = 1e-10
_DUALITY_TOL = 1e-12
_MAX_POINTS = 4_000_000


class QuadratureError(RuntimeError):
    pass


def _parse_s(s) -> complex:
    if isinstance(s, str):
        s = {"1": 1, "i": 1j, "1j": 1j}.get(s.strip().lower())
    if s == 1:
        return 1 + 0j
    if s == 1j:
        return 1j
    raise ValueError(f"s must be 1 or i, got {s!r}")


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    Q: np.ndarray
    W: np.ndarray
    s: complex
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    @property
    def euclidean(self) -> bool:
        return self.s == 1


def make_spec(Q, s=1) -> GaussianSpec:
    """Validate Q and pair it with W = Q^{-1}.

    Q must be symmetric and non-singular, and positive definite when s = 1
    (eigenvalues below 1e-10 * |Q| count as zero).
    """
    s = _parse_s(s)
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"Q must be square, got shape {Q.shape}")
    scale = np.linalg.norm(Q, 2)
    if scale == 0:
        raise ValueError("Q is zero")
    asym = np.abs(Q - Q.T).max()
    if asym > _SYM_TOL * scale:
        raise ValueError(f"Q is not symmetric (max asymmetry {asym:.3g})")
    Q = 0.5 * (Q + Q.T)
    lam = np.linalg.eigvalsh(Q)
    floor = _EIG_FLOOR * scale
    if s == 1 and lam.min() <= floor:
        raise ValueError(f"Q must be positive definite for s=1; smallest eigenvalue {lam.min():.3g}")
    if np.abs(lam).min() <= floor:
        raise ValueError(f"Q is singular; smallest |eigenvalue| {np.abs(lam).min():.3g}")
    W = np.linalg.inv(Q)
    W = 0.5 * (W + W.T)
    resid = np.abs(Q @ W - np.eye(Q.shape[0])).max()
    if resid > _DUALITY_TOL:
        raise ValueError(f"Q W deviates from the identity by {resid:.3g}; Q is too ill-conditioned")
    for a in (Q, W, lam):
        a.setflags(write=False)
    return GaussianSpec(Q, W, s, lam)


def dx_normalization(spec: GaussianSpec) -> complex:
    return complex(np.prod([cmath.sqrt(lam / spec.s) for lam in spec.eigenvalues]))


def fourier_rhs(spec: GaussianSpec, xprime) -> complex:
    """exp(-s pi x'.W.x')."""
    xp = _xprime(spec, xprime)
    return complex(cmath.exp(-spec.s * math.pi * float(xp @ spec.W @ xp)))


def _xprime(spec, xprime) -> np.ndarray:
    xp = np.atleast_1d(np.asarray(xprime, dtype=np.float64))
    if xp.shape != (spec.dim,):
        raise ValueError(f"x' must have {spec.dim} components, got shape {xp.shape}")
    return xp


def fourier_lhs_closed_form(spec: GaussianSpec, xprime) -> complex:
    """nu times the complex Gaussian integral, from the complex matrix M = Q / s.

    int exp(-pi x.M.x - 2 pi i x'.x) dx = prod_j mu_j^{-1/2} exp(-pi x'.M^{-1}.x')
    with mu_j the eigenvalues of M (principal branch). Uses neither W nor the
    real eigen-decomposition behind ``dx_normalization``'s factors.
    """
    xp = _xprime(spec, xprime)
    M = spec.Q.astype(complex) / spec.s
    mu = np.linalg.eigvals(M)
    det_factor = np.prod([1.0 / cmath.sqrt(m) for m in mu])
    quad = complex(xp @ np.linalg.solve(M, xp.astype(complex)))
    return dx_normalization(spec) * det_factor * cmath.exp(-math.pi * quad)


def _gh_rule(m: int):
    y, w = np.polynomial.hermite.hermgauss(m)
    return y, w


def fourier_lhs_quadrature(spec: GaussianSpec, xprime, nodes: int) -> tuple[complex, dict]:
    """nu int exp(-pi x.Q.x - 2 pi i x'.x) dx on a tensor-product Gauss-Hermite grid (s = 1).

    With Q = L L^T and y = sqrt(pi) L^T x the weight becomes exp(-|y|^2) and
    the integrand exp(-2 i sqrt(pi) (L^{-1} x').y); ``nodes`` points per axis.
    """
    if not spec.euclidean:
        raise ValueError("quadrature is only defined for s = 1")
    xp = _xprime(spec, xprime)
    D = spec.dim
    if nodes**D > _MAX_POINTS:
        raise QuadratureError(f"{nodes}^{D} points exceed the budget of {_MAX_POINTS}")
    L = np.linalg.cholesky(spec.Q)
    b = np.linalg.solve(L, xp)
    y1, w1 = _gh_rule(nodes)
    mesh = np.stack(np.meshgrid(*([y1] * D), indexing="ij"), axis=-1).reshape(-1, D)
    wts = np.prod(np.stack(np.meshgrid(*([w1] * D), indexing="ij"), axis=-1).reshape(-1, D), axis=1)
    vals = np.exp(-2j * math.sqrt(math.pi) * (mesh @ b))
    total = complex(np.dot(wts, vals)) / math.pi ** (D / 2)
    x_points = mesh @ np.linalg.inv(L) / math.sqrt(math.pi)
    return total, {"points": x_points, "weights": wts, "values": vals}


def _adaptive_quadrature(spec, xprime, tol, start=8):
    m, prev, _ = start, *fourier_lhs_quadrature(spec, xprime, start)
    while True:
        m2 = 2 * m
        if m2**spec.dim > _MAX_POINTS:
            raise QuadratureError(f"no convergence to {tol:g} within {_MAX_POINTS} points")
        cur, table = fourier_lhs_quadrature(spec, xprime, m2)
        err = abs(cur - prev)
        if err <= 0.1 * tol:
            return cur, err, m2, table
        m, prev = m2, cur


def verify_fourier(spec: GaussianSpec, xprime, method: str = "quadrature", tol: float | None = None,
                   n_samples: int = 100_000, stream: RngStream | None = None,
                   threshold: float = DEFAULT_SIGMA) -> VerificationReport:
    """Check the defining Fourier identity of Dx for one x'.

    ``quadrature`` (s = 1, D <= 3): adaptive tensor-product Gauss-Hermite, tol
    1e-6 by default. For s = i the left side is the closed-form complex
    Gaussian and the default tol is 1e-12. ``mc`` (s = 1): sample mean of
    exp(-2 pi i x'.x) under the normalized density nu exp(-pi x.Q.x).
    """
    xp = _xprime(spec, xprime)
    rhs = fourier_rhs(spec, xp)
    details = {"Q": spec.Q, "s": "i" if spec.s == 1j else "1", "xprime": xp, "method": method}
    if not spec.euclidean:
        tol = 1e-12 if tol is None else tol
        lhs = fourier_lhs_closed_form(spec, xp)
        details["method"] = "closed-form"
        return VerificationReport("fourier-fresnel", "defDx", lhs, rhs, abs(lhs - rhs), abs_tol=tol,
                                  details=details)
    if method == "quadrature":
        tol = 1e-6 if tol is None else tol
        if spec.dim > 3:
            raise ValueError("tensor-product quadrature is limited to D <= 3")
        lhs, err, m, _ = _adaptive_quadrature(spec, xp, tol)
        details.update(nodes_per_axis=m, quadrature_error=err)
        return VerificationReport("fourier-gaussian", "finite", lhs, rhs, abs(lhs - rhs), abs_tol=tol,
                                  details=details)
    if method == "mc":
        stream = stream or RngStream(0)
        x = _sample(spec, n_samples, stream)
        phase = -2.0 * math.pi * (x @ xp)
        re = against_exact("fourier-gaussian-mc-re", "finite", np.cos(phase), rhs.real, threshold)
        im = against_exact("fourier-gaussian-mc-im", "finite", np.sin(phase), rhs.imag, threshold)
        return aggregate("fourier-gaussian-mc", "finite", [re, im], details=details, seed=stream.seed)
    raise ValueError(f"unknown method {method!r}")


def _sample(spec: GaussianSpec, n: int, stream: RngStream) -> np.ndarray:
    # density nu exp(-pi x.Q.x) is N(0, W / (2 pi))
    C = np.linalg.cholesky(spec.W / (2.0 * math.pi))
    z = stream.generator().standard_normal((n, spec.dim))
    return z @ C.T


def covariance_check(spec: GaussianSpec, n_samples: int, stream: RngStream,
                     threshold: float = DEFAULT_SIGMA) -> VerificationReport:
    """2 pi E[x_l x_m] = W_lm for every entry, under the s = 1 volume form."""
    if not spec.euclidean:
        raise ValueError("covariance check needs s = 1")
    x = _sample(spec, n_samples, stream)
    cases = []
    for a in range(spec.dim):
        for b in range(a, spec.dim):
            cases.append(against_exact(f"covariance[{a},{b}]", "finite",
                                       2.0 * math.pi * x[:, a] * x[:, b], spec.W[a, b], threshold))
    return aggregate("gaussian-covariance", "finite", cases, details={"Q": spec.Q},
                     seed=stream.seed)


def random_spd(dim: int, rng: np.random.Generator, cond_max: float = 1e3, lam_min: float = 0.5) -> np.ndarray:
    """Random symmetric positive-definite matrix with condition number at most ``cond_max``."""
    lam = lam_min * np.exp(rng.uniform(0.0, math.log(cond_max), size=dim))
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    Q = (q * lam) @ q.T
    return 0.5 * (Q + Q.T)


def write_quadrature_csv(target, table: dict):
    """Rows ``point,weight,value``; points are ';'-joined coordinates, values complex."""
    close = False
    if not hasattr(target, "write"):
        target = open(target, "w", newline="")
        close = True
    try:
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["point", "weight", "value"])
        for p, w, v in zip(table["points"], table["weights"], table["values"]):
            writer.writerow([";".join(repr(float(c)) for c in p), repr(float(w)), repr(complex(v))])
    finally:
        if close:
            target.close()
