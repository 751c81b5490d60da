"""Monte Carlo checks of the characteristic functional, Cameron-Martin and Malliavin identities."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .estimator import McEstimate, RngStream
from .paths import (
    DiscretePath,
    DualMeasure,
    Grid,
    Shift,
    basis_shift,
    div_A,
    inner_21,
    linear_shift,
    sample_path_stats,
)
from .report import (
    DEFAULT_SIGMA,
    VerificationReport,
    against_exact,
    paired_report,
    sigma_units,
)

__all__ = [
    "CylinderFunctional",
    "NonFiniteDensityError",
    "cm_density",
    "cm_exponent",
    "verify_characteristic_functional",
    "verify_cameron_martin",
    "verify_cm_normalization",
    "verify_malliavin",
    "verify_malliavin_isometry",
    "a_functional",
    "standard_functionals",
    "standard_shifts",
    "cameron_martin_suite",
]

_EXP_MAX = math.log(np.finfo(np.float64).max)
_FD_EPS = np.finfo(np.float64).eps ** (1.0 / 3.0)


class NonFiniteDensityError(OverflowError):
    def __init__(self, exponent: float):
        super().__init__(f"Cameron-Martin density overflows: exponent {exponent:.6g}")
        self.exponent = exponent


@dataclass(frozen=True)
class CylinderFunctional:
    """F(w) = f(w(t_1), ..., w(t_m)).

    ``f`` and ``grad_f`` are vectorized over leading axes: ``f`` maps an array
    of shape ``(N, m)`` to ``(N,)`` and ``grad_f`` maps it to ``(N, m)``.
    Without ``grad_f`` the Gateaux derivative is a central difference with
    step ``eps**(1/3) * (1 + max_j |w(t_j)|)``.

    ``growth = (C, p)`` declares ``|F| <= C (1 + max_j |w(t_j)|)**p``; a
    violation only triggers a warning.
    """

    times: tuple[float, ...]
    f: Callable[[np.ndarray], np.ndarray]
    grad_f: Callable[[np.ndarray], np.ndarray] | None = None
    growth: tuple[float, float] | None = None
    label: str = ""

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times:
            raise ValueError("a cylinder functional needs at least one time")
        if any(not 0.0 < t <= 1.0 for t in times):
            raise ValueError(f"times must lie in (0, 1], got {times}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"times must be strictly increasing, got {times}")
        object.__setattr__(self, "times", times)

    def node_indices(self, grid: Grid) -> np.ndarray:
        return np.array([grid.node_index(t) for t in self.times], dtype=np.intp)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.asarray(self.f(x), dtype=np.float64).reshape(x.shape[0])

    def on_path(self, w: DiscretePath) -> float:
        return float(self(w.values[self.node_indices(w.grid)])[0])

    def directional(self, x, v) -> np.ndarray:
        """Derivative of ``f`` at each row of ``x`` in direction ``v`` (shape ``(m,)``)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        v = np.asarray(v, dtype=np.float64)
        if self.grad_f is not None:
            return np.asarray(self.grad_f(x), dtype=np.float64).reshape(x.shape) @ v
        h = (_FD_EPS * (1.0 + np.abs(x).max(axis=1)))[:, None]
        return (self(x + h * v) - self(x - h * v)) / (2.0 * h[:, 0])

    def check_growth(self, x, values):
        if self.growth is None:
            return
        c, p = self.growth
        bound = c * (1.0 + np.abs(x).max(axis=1)) ** p
        n_bad = int(np.count_nonzero(np.abs(values) > bound))
        if n_bad:
            warnings.warn(f"{n_bad} samples of {self.label or 'F'} exceed the declared growth bound",
                          RuntimeWarning, stacklevel=3)


def cm_exponent(phi: Shift, w: DiscretePath) -> float:
    return -0.5 * phi.norm2() + div_A(phi, w)


def cm_density(phi: Shift, w: DiscretePath) -> float:
    """J(phi, w) = exp(-|phi|^2 / 2 + A_phi(w)); raises when the exponential overflows."""
    e = cm_exponent(phi, w)
    if e > _EXP_MAX:
        raise NonFiniteDensityError(e)
    return math.exp(e)


def _cm_weights(phi: Shift, ito: np.ndarray) -> np.ndarray:
    e = -0.5 * phi.norm2() + ito
    worst = int(np.argmax(e)) if e.size else 0
    if e.size and e[worst] > _EXP_MAX:
        raise NonFiniteDensityError(float(e[worst]))
    return np.exp(e)


def _meta(stream: RngStream, grid: Grid) -> dict:
    return {"seed": stream.seed, "grid_n": grid.n}


def verify_characteristic_functional(dual: DualMeasure, grid: Grid, n_samples: int, stream: RngStream,
                                     threshold: float = DEFAULT_SIGMA, workers: int = 1) -> VerificationReport:
    """E[exp(-i <w', w>)] against exp(-1/2 sum a_j a_k min(t_j, t_k)).

    Real and imaginary parts are tested separately; the reported sigma is the
    worse of the two.
    """
    nodes = dual.node_indices(grid)
    stats = sample_path_stats(grid, n_samples, stream, nodes=nodes, workers=workers)
    pairing = stats.values @ dual.weights if nodes.size else np.zeros(n_samples)
    exact = math.exp(-0.5 * dual.covariance_form())
    re = McEstimate.from_values(np.cos(pairing))
    im = McEstimate.from_values(-np.sin(pairing))
    s_re = sigma_units(re.mean - exact, re.std_error)
    s_im = sigma_units(im.mean, im.std_error)
    return VerificationReport(
        "characteristic-functional", "a1", re, exact,
        discrepancy=abs(complex(re.mean - exact, im.mean)),
        sigma_units=max(s_re, s_im), threshold=threshold,
        details={"atoms": dual.atoms, "lhs_imag": im, "rhs_imag": 0.0,
                 "sigma_real": s_re, "sigma_imag": s_im},
        **_meta(stream, grid),
    )


def verify_cm_normalization(phi: Shift, grid: Grid, n_samples: int, stream: RngStream,
                            threshold: float = DEFAULT_SIGMA, workers: int = 1) -> VerificationReport:
    """E[J(phi, w)] = 1, the Cameron-Martin formula with F = 1."""
    stats = sample_path_stats(grid, n_samples, stream, shifts=[phi], workers=workers)
    return against_exact("cm-density-normalization", "a6", _cm_weights(phi, stats.ito[:, 0]), 1.0,
                         threshold, details={"phi": phi.label}, **_meta(stream, grid))


def verify_cameron_martin(F: CylinderFunctional, phi: Shift, grid: Grid, n_samples: int, stream: RngStream,
                          threshold: float = DEFAULT_SIGMA, workers: int = 1) -> VerificationReport:
    """E[F(w + phi)] against E[J(phi, w) F(w)] on the same paths."""
    nodes = F.node_indices(grid)
    stats = sample_path_stats(grid, n_samples, stream, shifts=[phi], nodes=nodes, workers=workers)
    x = stats.values
    fx = F(x)
    F.check_growth(x, fx)
    lhs = F(x + phi.values[nodes])
    rhs = _cm_weights(phi, stats.ito[:, 0]) * fx
    return paired_report("cameron-martin", "a4", lhs, rhs, threshold,
                         details={"phi": phi.label, "F": F.label}, **_meta(stream, grid))


def verify_malliavin(F: CylinderFunctional, phi: Shift, grid: Grid, n_samples: int, stream: RngStream,
                     threshold: float = DEFAULT_SIGMA, workers: int = 1) -> VerificationReport:
    """E[D_phi F(w)] against E[A_phi(w) F(w)] on the same paths."""
    nodes = F.node_indices(grid)
    stats = sample_path_stats(grid, n_samples, stream, shifts=[phi], nodes=nodes, workers=workers)
    x = stats.values
    fx = F(x)
    F.check_growth(x, fx)
    lhs = F.directional(x, phi.values[nodes])
    rhs = stats.ito[:, 0] * fx
    return paired_report("malliavin", "a16", lhs, rhs, threshold,
                         details={"phi": phi.label, "F": F.label}, **_meta(stream, grid))


def verify_malliavin_isometry(phi1: Shift, phi2: Shift, grid: Grid, n_samples: int, stream: RngStream,
                              threshold: float = DEFAULT_SIGMA, workers: int = 1) -> VerificationReport:
    """Malliavin with F = A_phi2: E[D_phi1 A_phi2] = E[A_phi1 A_phi2] = (phi1 | phi2).

    ``D_phi1 A_phi2`` does not depend on the path (A is linear), so the left
    side is the deterministic value A_phi2(phi1); the right side is sampled.
    """
    stats = sample_path_stats(grid, n_samples, stream, shifts=[phi1, phi2], workers=workers)
    prod = stats.ito[:, 0] * stats.ito[:, 1]
    gateaux = float(np.dot(phi2.deriv, np.diff(phi1.values)))
    exact = inner_21(phi1, phi2)
    rep = against_exact("malliavin-isometry", "twoseven", prod, exact, threshold,
                        details={"phi1": phi1.label, "phi2": phi2.label, "gateaux": gateaux},
                        **_meta(stream, grid))
    # The deterministic side must agree with the inner product to rounding.
    if abs(gateaux - exact) > 1e-12 * max(1.0, abs(exact)):
        rep.passed = False
    return rep


def a_functional(phi: Shift, grid: Grid) -> CylinderFunctional:
    """A_phi as a cylinder functional over every positive grid node."""
    times = tuple(grid.nodes[1:])
    d = np.asarray(phi.deriv)
    grad = d - np.append(d[1:], 0.0)

    def f(x):
        return np.diff(np.concatenate([np.zeros((x.shape[0], 1)), x], axis=1), axis=1) @ d

    return CylinderFunctional(times, f, lambda x: np.broadcast_to(grad, x.shape), label=f"A[{phi.label}]")


def standard_functionals() -> list[CylinderFunctional]:
    """w(1), w(1)^2, exp(-w(1)^2) and w(0.5) w(1), each with its gradient."""
    return [
        CylinderFunctional((1.0,), lambda x: x[:, 0], lambda x: np.ones_like(x), (1.0, 1.0), "w(1)"),
        CylinderFunctional((1.0,), lambda x: x[:, 0] ** 2, lambda x: 2.0 * x, (1.0, 2.0), "w(1)^2"),
        CylinderFunctional((1.0,), lambda x: np.exp(-x[:, 0] ** 2),
                           lambda x: -2.0 * x * np.exp(-x**2), (1.0, 0.0), "exp(-w(1)^2)"),
        CylinderFunctional((0.5, 1.0), lambda x: x[:, 0] * x[:, 1],
                           lambda x: x[:, ::-1].copy(), (1.0, 2.0), "w(0.5)w(1)"),
    ]


def standard_shifts(grid: Grid) -> list[Shift]:
    return [basis_shift(1, grid), basis_shift(2, grid), linear_shift(grid)]


def cameron_martin_suite(shifts, functionals, grid: Grid, n_samples: int, stream: RngStream,
                         threshold: float = DEFAULT_SIGMA, workers: int = 1,
                         malliavin: bool = False) -> list[VerificationReport]:
    """Cameron-Martin (or Malliavin) checks for every (phi, F) pair.

    One batch of paths per shift serves all functionals; shift ``j`` uses
    ``stream.child(j)``.
    """
    nodes = sorted({int(i) for F in functionals for i in F.node_indices(grid)})
    col = {node: c for c, node in enumerate(nodes)}
    out = []
    for j, phi in enumerate(shifts):
        sub = stream.child(j)
        stats = sample_path_stats(grid, n_samples, sub, shifts=[phi], nodes=nodes, workers=workers)
        ito = stats.ito[:, 0]
        weights = None if malliavin else _cm_weights(phi, ito)
        for F in functionals:
            idx = F.node_indices(grid)
            x = stats.values[:, [col[int(i)] for i in idx]]
            fx = F(x)
            F.check_growth(x, fx)
            if malliavin:
                lhs, rhs, name, eq = F.directional(x, phi.values[idx]), ito * fx, "malliavin", "a16"
            else:
                lhs, rhs, name, eq = F(x + phi.values[idx]), weights * fx, "cameron-martin", "a4"
            out.append(paired_report(name, eq, lhs, rhs, threshold,
                                     details={"phi": phi.label, "F": F.label}, **_meta(sub, grid)))
    return out
