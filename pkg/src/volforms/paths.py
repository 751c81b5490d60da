"""Pointed paths on a uniform grid of [0, 1], Brownian sampling and path functionals.

Conventions
-----------
A :class:`Shift` stores its values at the ``n + 1`` nodes and one derivative
value per step, ``deriv[i] = (phi[i+1] - phi[i]) / dt``: the slope of the
piecewise-linear shift on ``[t_i, t_{i+1})``, attached to the left node. With
this choice the discrete Cameron-Martin and Malliavin identities hold exactly
for the grid-level Gaussian measure, so every Monte Carlo discrepancy is
sampling noise. The stochastic integral is the left-point sum
``sum_i deriv[i] * (w[i+1] - w[i])``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .estimator import RngStream, draw

__all__ = [
    "Grid",
    "DiscretePath",
    "Shift",
    "DualMeasure",
    "GridMismatchError",
    "PathStats",
    "sample_brownian",
    "sample_increments",
    "sample_path_stats",
    "div_A",
    "div_A_by_parts",
    "riemann_Q",
    "Q_difference",
    "inner_21",
    "basis_shift",
    "linear_shift",
    "zero_shift",
    "write_path_csv",
]

_NODE_TOL = 1e-12
_CHUNK = 4096


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"grid needs a positive integer number of steps, got {self.n!r}")

    @property
    def dt(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    def node_index(self, t: float) -> int:
        """Index of the node at time ``t``; off-grid times are an error."""
        x = t * self.n
        i = int(round(x))
        if abs(x - i) > _NODE_TOL * max(1.0, self.n) or not 0 <= i <= self.n:
            raise ValueError(f"time {t} is not a node of the {self.n}-step grid")
        return i


def _check_same(a: Grid, b: Grid):
    if a != b:
        raise GridMismatchError(f"grids differ: n={a.n} vs n={b.n}")


@dataclass(frozen=True, eq=False)
class DiscretePath:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n + 1,):
            raise ValueError(f"expected {self.grid.n + 1} values, got shape {v.shape}")
        if v[0] != 0.0:
            raise ValueError("paths are pointed: w(0) must be 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_increments(cls, grid: Grid, dw) -> "DiscretePath":
        return cls(grid, np.concatenate([[0.0], np.cumsum(dw)]))

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def at(self, t: float) -> float:
        return float(self.values[self.grid.node_index(t)])

    def __sub__(self, phi: "Shift") -> "DiscretePath":
        _check_same(self.grid, phi.grid)
        return DiscretePath(self.grid, self.values - phi.values)

    def __add__(self, phi: "Shift") -> "DiscretePath":
        _check_same(self.grid, phi.grid)
        return DiscretePath(self.grid, self.values + phi.values)


@dataclass(frozen=True, eq=False)
class Shift:
    """A Cameron-Martin direction sampled on a grid.

    ``deriv`` has one entry per step (left-node convention, see module
    docstring); ``second``, when present, holds the second derivative at all
    ``n + 1`` nodes and enables the integrated-by-parts form of ``A_phi``.
    """

    grid: Grid
    values: np.ndarray
    deriv: np.ndarray
    second: np.ndarray | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        n = self.grid.n
        v = np.asarray(self.values, dtype=np.float64)
        d = np.asarray(self.deriv, dtype=np.float64)
        if v.shape != (n + 1,) or d.shape != (n,):
            raise ValueError(f"shift arrays have shapes {v.shape}, {d.shape}; expected ({n + 1},), ({n},)")
        if v[0] != 0.0:
            raise ValueError("a shift must vanish at t=0 so that w + phi stays pointed")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(d))):
            raise ValueError("shift has non-finite entries")
        for a in (v, d):
            a.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "deriv", d)
        if self.second is not None:
            s = np.asarray(self.second, dtype=np.float64)
            if s.shape != (n + 1,):
                raise ValueError(f"second derivative needs {n + 1} node values")
            s.setflags(write=False)
            object.__setattr__(self, "second", s)

    @classmethod
    def from_function(cls, grid: Grid, phi: Callable, second: Callable | None = None,
                      label: str = "") -> "Shift":
        t = grid.nodes
        v = np.asarray(phi(t), dtype=np.float64) * np.ones_like(t)
        s = None if second is None else np.asarray(second(t), dtype=np.float64) * np.ones_like(t)
        return cls(grid, v, np.diff(v) / grid.dt, s, label)

    def norm2(self) -> float:
        """Squared discrete L^{2,1} norm."""
        return inner_21(self, self)

    def __add__(self, other: "Shift") -> "Shift":
        _check_same(self.grid, other.grid)
        second = None if self.second is None or other.second is None else self.second + other.second
        return Shift(self.grid, self.values + other.values, self.deriv + other.deriv, second)

    def __mul__(self, c: float) -> "Shift":
        second = None if self.second is None else c * self.second
        return Shift(self.grid, c * self.values, c * self.deriv, second)

    __rmul__ = __mul__


def zero_shift(grid: Grid) -> Shift:
    return Shift(grid, np.zeros(grid.n + 1), np.zeros(grid.n), np.zeros(grid.n + 1), "zero")


def linear_shift(grid: Grid) -> Shift:
    """phi(t) = t."""
    return Shift.from_function(grid, lambda t: t, lambda t: 0.0 * t, "linear")


def basis_shift(k: int, grid: Grid) -> Shift:
    """Member ``k >= 1`` of the family sqrt(2) sin((k-1/2) pi t) / ((k-1/2) pi).

    The derivatives sqrt(2) cos((k-1/2) pi t) are orthonormal in L^2[0,1], and
    each member satisfies phi(0) = 0 and phi'(1) = 0. On an ``n``-step grid the
    discrete Gram matrix deviates from the identity by about
    ((k-1/2) pi)^2 / (12 n^2) on the diagonal.
    """
    if k < 1:
        raise ValueError("basis index starts at 1")
    a = (k - 0.5) * math.pi
    r2 = math.sqrt(2.0)
    return Shift.from_function(grid, lambda t: r2 * np.sin(a * t) / a,
                               lambda t: -r2 * a * np.sin(a * t), f"basis:{k}")


@dataclass(frozen=True)
class DualMeasure:
    """Finite atomic measure on (0, 1]; pairs with a path as sum_k a_k w(t_k)."""

    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((float(t), float(a)) for t, a in self.atoms)
        for t, _ in atoms:
            if not 0.0 < t <= 1.0:
                raise ValueError(f"atom time {t} outside (0, 1]")
        object.__setattr__(self, "atoms", atoms)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([a for _, a in self.atoms])

    def node_indices(self, grid: Grid) -> np.ndarray:
        return np.array([grid.node_index(t) for t, _ in self.atoms], dtype=np.intp)

    def pair(self, w: DiscretePath) -> float:
        idx = self.node_indices(w.grid)
        return float(np.dot(self.weights, w.values[idx])) if idx.size else 0.0

    def covariance_form(self) -> float:
        """sum_{j,k} a_j a_k min(t_j, t_k)."""
        t, a = self.times, self.weights
        if not t.size:
            return 0.0
        return float(a @ np.minimum.outer(t, t) @ a)


def sample_brownian(grid: Grid, stream: RngStream) -> DiscretePath:
    """One Brownian path; identical to row 0 of :func:`sample_increments` on the same stream."""
    dw = stream.generator().standard_normal((1, grid.n))[0] * math.sqrt(grid.dt)
    return DiscretePath.from_increments(grid, dw)


def _increment_block(grid: Grid):
    scale = math.sqrt(grid.dt)

    def block(gen, size):
        return gen.standard_normal((size, grid.n)) * scale

    return block


def sample_increments(grid: Grid, n_paths: int, stream: RngStream, workers: int = 1) -> np.ndarray:
    """Brownian increments, shape ``(n_paths, n)``. Meant for modest batches."""
    return draw(_increment_block(grid), n_paths, stream, workers)


@dataclass(frozen=True)
class PathStats:
    """Per-path reductions of a Brownian batch.

    ``ito[:, j]`` is the stochastic integral against ``shifts[j]``,
    ``values[:, k]`` the path value at ``nodes[k]`` and ``sq`` the sum of
    squared increments.
    """

    grid: Grid
    ito: np.ndarray
    values: np.ndarray
    sq: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.sq.shape[0]


def sample_path_stats(grid: Grid, n_paths: int, stream: RngStream, shifts: Sequence[Shift] = (),
                      nodes: Iterable[int] = (), workers: int = 1, chunk: int = _CHUNK) -> PathStats:
    """Sample ``n_paths`` Brownian paths and reduce each one in a single kernel pass.

    Paths are drawn in chunks so memory stays bounded; chunking does not change
    the draws.
    """
    for phi in shifts:
        _check_same(grid, phi.grid)
    weights = np.array([phi.deriv for phi in shifts]).reshape(len(shifts), grid.n)
    nodes = np.asarray(list(nodes), dtype=np.intp)
    m, k = weights.shape[0], nodes.size
    scale = math.sqrt(grid.dt)

    def block(gen, size):
        out = np.empty((size, m + k + 1))
        for start in range(0, size, chunk):
            stop = min(size, start + chunk)
            dw = gen.standard_normal((stop - start, grid.n)) * scale
            ito, vals, sq = _kernels.path_stats(dw, weights, nodes)
            out[start:stop, :m] = ito
            out[start:stop, m:m + k] = vals
            out[start:stop, -1] = sq
        return out

    res = draw(block, n_paths, stream, workers)
    return PathStats(grid, res[:, :m], res[:, m:m + k], res[:, -1])


def div_A(phi: Shift, w: DiscretePath) -> float:
    """Left-point stochastic integral sum_i deriv[i] (w[i+1] - w[i])."""
    _check_same(phi.grid, w.grid)
    return float(np.dot(phi.deriv, w.increments))


def div_A_by_parts(phi: Shift, w: DiscretePath, boundary_ok: bool = False) -> float:
    """The integrated-by-parts form -int w(t) phi''(t) dt (trapezoidal rule).

    Valid only when phi(0) = 0 and phi'(1) = 0, which the caller asserts with
    ``boundary_ok=True``; the boundary term is then dropped.
    """
    _check_same(phi.grid, w.grid)
    if phi.second is None:
        raise ValueError("shift carries no second derivative")
    if not boundary_ok:
        raise ValueError("by-parts form requires phi(0) = 0 and phi'(1) = 0; pass boundary_ok=True")
    f = w.values * phi.second
    return float(-(f[1:-1].sum() + 0.5 * f[-1]) * phi.grid.dt)


def riemann_Q(w: DiscretePath) -> float:
    """(1 / 2 pi) sum (dw_i)^2 / dt; grows like n / (2 pi) for Brownian paths."""
    dw = w.increments
    return float(np.dot(dw, dw) / w.grid.dt / (2.0 * math.pi))


def Q_difference(w: DiscretePath, phi: Shift) -> float:
    """riemann_Q(w) - riemann_Q(w - phi) without forming either divergent sum."""
    _check_same(phi.grid, w.grid)
    return (2.0 * div_A(phi, w) - phi.norm2()) / (2.0 * math.pi)


def inner_21(phi1: Shift, phi2: Shift) -> float:
    """Discrete L^{2,1} inner product sum_i phi1'_i phi2'_i dt."""
    _check_same(phi1.grid, phi2.grid)
    return float(np.dot(phi1.deriv, phi2.deriv) * phi1.grid.dt)


def write_path_csv(target, path: DiscretePath):
    """Write one path as ``t,w`` rows, one per node."""
    close = False
    if not hasattr(target, "write"):
        target = open(target, "w", newline="")
        close = True
    try:
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["t", "w"])
        for t, v in zip(path.grid.nodes, path.values):
            writer.writerow([repr(float(t)), repr(float(v))])
    finally:
        if close:
            target.close()
