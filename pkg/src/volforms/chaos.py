"""Wiener chaos as polynomials in Gaussian coordinates.

A :class:`ChaosPoly` in ``K`` modes is a polynomial in xi_1..xi_K, where
xi_k = A_{e_k}(w) for the orthonormal shift family of :func:`paths.basis_shift`;
under Wiener measure these are i.i.d. standard normals. Directions are
:class:`ModeVector` coefficient lists in the same basis, so (phi1 | phi2) is
the Euclidean dot product. All algebra is exact for int/Fraction coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from ._poly import Poly, monomials, random_poly
from .estimator import RngStream
from .paths import Grid, basis_shift, sample_path_stats
from .report import DEFAULT_SIGMA, VerificationReport, against_exact

__all__ = [
    "ChaosPoly",
    "ModeVector",
    "vacuum",
    "xi",
    "apply_D",
    "apply_A",
    "creation",
    "annihilation",
    "gaussian_expectation",
    "expectation_inner",
    "hermite",
    "verify_commutators",
    "verify_adjointness",
    "verify_adjointness_random",
    "verify_hermite",
    "vacuum_nullspace_dim",
    "totality_rank",
    "mc_bridge",
]


class ChaosPoly(Poly):
    __slots__ = ()

    @property
    def n_modes(self) -> int:
        return self.nvars


@dataclass(frozen=True)
class ModeVector:
    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a mode vector needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @classmethod
    def basis(cls, k: int, n_modes: int) -> "ModeVector":
        """e_k, with ``k`` counted from 1."""
        if not 1 <= k <= n_modes:
            raise ValueError(f"mode {k} outside 1..{n_modes}")
        return cls(tuple(1 if j == k - 1 else 0 for j in range(n_modes)))

    @property
    def n_modes(self) -> int:
        return len(self.coeffs)

    def inner(self, other: "ModeVector") -> object:
        _match(self.n_modes, other.n_modes)
        return sum(a * b for a, b in zip(self.coeffs, other.coeffs))


def _match(k1: int, k2: int):
    if k1 != k2:
        raise ValueError(f"mode count mismatch: {k1} vs {k2}")


def vacuum(n_modes: int) -> ChaosPoly:
    return ChaosPoly.constant(n_modes, 1)


def xi(k: int, n_modes: int) -> ChaosPoly:
    """The coordinate xi_k, ``k`` counted from 1."""
    return ChaosPoly.variable(n_modes, k - 1)


def apply_D(phi: ModeVector, P: ChaosPoly) -> ChaosPoly:
    """Gateaux derivative sum_k c_k dP/dxi_k."""
    _match(phi.n_modes, P.n_modes)
    out = ChaosPoly(P.n_modes)
    for k, c in enumerate(phi.coeffs):
        if c:
            out = out + P.deriv(k) * c
    return out


def apply_A(phi: ModeVector, P: ChaosPoly) -> ChaosPoly:
    """Multiplication by A_phi = sum_k c_k xi_k."""
    _match(phi.n_modes, P.n_modes)
    a = ChaosPoly(P.n_modes, {tuple(int(j == k) for j in range(P.n_modes)): c
                              for k, c in enumerate(phi.coeffs)})
    return a * P


def creation(phi: ModeVector, P: ChaosPoly) -> ChaosPoly:
    return apply_A(phi, P) - apply_D(phi, P)


def annihilation(phi: ModeVector, P: ChaosPoly) -> ChaosPoly:
    return apply_D(phi, P)


def _moment(a: int) -> int:
    # E[xi^a] for a standard normal: (a-1)!! for even a, 0 for odd
    if a % 2:
        return 0
    return math.prod(range(a - 1, 0, -2))


def gaussian_expectation(P: ChaosPoly):
    """Exact E[P] with xi_k i.i.d. N(0, 1); the vacuum expectation <Omega|P|Omega>."""
    total = 0
    for e, c in P.terms.items():
        m = math.prod(_moment(a) for a in e)
        if m:
            total = total + c * m
    return total


def expectation_inner(P: ChaosPoly, Q: ChaosPoly):
    """<P, Q> = E[P Q]."""
    return gaussian_expectation(P * Q)


def hermite(k: int, n_modes: int = 1, mode: int = 1) -> ChaosPoly:
    """Probabilists' Hermite polynomial He_k(xi_mode) from the three-term recursion."""
    x = xi(mode, n_modes)
    prev, cur = ChaosPoly(n_modes), vacuum(n_modes)
    for j in range(k):
        prev, cur = cur, x * cur - prev * j
    return cur


def _first_difference(P: ChaosPoly, Q: ChaosPoly):
    """Largest absolute coefficient of P - Q, or 0 when they are equal."""
    diff = P - Q
    return max((abs(c) for c in diff.terms.values()), default=0)


def _random_mode_vector(rng: np.random.Generator, n_modes: int, low=-3, high=3) -> ModeVector:
    return ModeVector(tuple(int(v) for v in rng.integers(low, high + 1, size=n_modes)))


def verify_commutators(n_modes: int, degree_cap: int, n_cases: int = 50,
                       stream: RngStream | None = None) -> VerificationReport:
    """[D, D] = 0, [A, A] = 0 and [D_phi1, A_phi2] = (phi1|phi2) Id on random inputs, exactly.

    Each case draws ``K`` in ``1..n_modes``, integer mode vectors and a random
    integer polynomial of degree at most ``degree_cap``.
    """
    stream = stream or RngStream(0)
    rng = stream.generator()
    worst, counterexample = 0, None
    for case in range(n_cases):
        k = int(rng.integers(1, n_modes + 1))
        p1, p2 = _random_mode_vector(rng, k), _random_mode_vector(rng, k)
        P = random_poly(k, degree_cap, rng, cls=ChaosPoly)
        checks = {
            "[D,D]": apply_D(p1, apply_D(p2, P)) - apply_D(p2, apply_D(p1, P)),
            "[A,A]": apply_A(p1, apply_A(p2, P)) - apply_A(p2, apply_A(p1, P)),
            "[D,A]-(phi1|phi2)": (apply_D(p1, apply_A(p2, P)) - apply_A(p2, apply_D(p1, P)))
            - P * p1.inner(p2),
            "[a,a+]-(phi1|phi2)": (annihilation(p1, creation(p2, P)) - creation(p2, annihilation(p1, P)))
            - P * p1.inner(p2),
        }
        for name, residual in checks.items():
            if residual:
                worst = max(worst, _first_difference(residual, ChaosPoly(k)))
            if residual and counterexample is None:
                counterexample = {"case": case, "relation": name, "phi1": p1.coeffs, "phi2": p2.coeffs,
                                  "P": repr(P), "residual": repr(residual)}
    return VerificationReport(
        "chaos-commutators", "twofour", None, None, discrepancy=float(worst), abs_tol=0.0,
        details={"n_cases": n_cases, "max_modes": n_modes, "degree_cap": degree_cap,
                 "counterexample": counterexample},
        seed=stream.seed,
    )


def verify_adjointness(F1: ChaosPoly, F2: ChaosPoly, phi: ModeVector) -> VerificationReport:
    """E[(D_phi F1) F2] = E[F1 (A_phi F2 - D_phi F2)], exactly."""
    lhs = expectation_inner(apply_D(phi, F1), F2)
    rhs = expectation_inner(F1, creation(phi, F2))
    return VerificationReport("chaos-adjointness", "a16", lhs, rhs,
                              discrepancy=float(abs(lhs - rhs)), abs_tol=0.0)


def verify_adjointness_random(n_modes: int, degree_cap: int, n_cases: int = 50,
                              stream: RngStream | None = None) -> VerificationReport:
    stream = stream or RngStream(0)
    rng = stream.generator()
    worst, bad = 0.0, None
    for case in range(n_cases):
        k = int(rng.integers(1, n_modes + 1))
        F1 = random_poly(k, degree_cap, rng, cls=ChaosPoly)
        F2 = random_poly(k, degree_cap, rng, cls=ChaosPoly)
        rep = verify_adjointness(F1, F2, _random_mode_vector(rng, k))
        worst = max(worst, rep.discrepancy)
        if not rep.passed and bad is None:
            bad = {"case": case, "F1": repr(F1), "F2": repr(F2), "lhs": rep.lhs, "rhs": rep.rhs}
    return VerificationReport("chaos-adjointness", "a16", None, None, discrepancy=worst,
                              abs_tol=0.0, details={"n_cases": n_cases, "counterexample": bad},
                              seed=stream.seed)


def verify_hermite(max_k: int = 6) -> VerificationReport:
    """a+(e_1)^k applied to the vacuum equals He_k(xi_1) for k <= max_k."""
    e1 = ModeVector.basis(1, 1)
    state, worst, mismatches = vacuum(1), 0, []
    for k in range(max_k + 1):
        if k:
            state = creation(e1, state)
        d = _first_difference(state, hermite(k))
        if d:
            mismatches.append(k)
        worst = max(worst, d)
    return VerificationReport("chaos-hermite", "twofour", None, None, discrepancy=float(worst),
                              abs_tol=0.0, details={"max_k": max_k, "mismatched_k": mismatches})


def _rank(rows: list[list]) -> int:
    """Exact rank by Gaussian elimination over the rationals."""
    m = [[Fraction(v) for v in row] for row in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][col]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / pv
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def vacuum_nullspace_dim(n_modes: int, degree_cap: int) -> tuple[int, bool]:
    """States of degree <= cap orthogonal to every a+(e_k) F with deg F < cap.

    Returns the dimension of that space and whether the constant 1 lies in
    it. The vacuum is unique up to scale iff the answer is ``(1, True)``.
    """
    basis = monomials(n_modes, degree_cap)
    tests = []
    for k in range(1, n_modes + 1):
        ek = ModeVector.basis(k, n_modes)
        for e in monomials(n_modes, degree_cap - 1):
            tests.append(creation(ek, ChaosPoly(n_modes, {e: 1})))
    rows = [[gaussian_expectation(ChaosPoly(n_modes, {b: 1}) * t) for b in basis] for t in tests]
    dim = len(basis) - _rank(rows)
    one = basis.index((0,) * n_modes)
    return dim, all(row[one] == 0 for row in rows)


def totality_rank(n_modes: int, max_order: int, use_creation: bool = False) -> tuple[int, int]:
    """Rank of {A_{e_k1} ... A_{e_kj} 1 : j <= max_order} against the monomial count.

    With ``use_creation`` the products use a+ instead of A (Hermite states).
    """
    basis = monomials(n_modes, max_order)
    op = creation if use_creation else apply_A
    vectors = []
    for j in range(max_order + 1):
        for ks in combinations_with_replacement(range(1, n_modes + 1), j):
            state = vacuum(n_modes)
            for k in ks:
                state = op(ModeVector.basis(k, n_modes), state)
            vectors.append([state.terms.get(b, 0) for b in basis])
    return _rank(vectors), len(basis)


def mc_bridge(P: ChaosPoly, grid: Grid, n_samples: int, stream: RngStream,
              threshold: float = DEFAULT_SIGMA, workers: int = 1) -> VerificationReport:
    """Monte Carlo mean of P(A_{e_1}(w), ..., A_{e_K}(w)) against the exact Gaussian expectation."""
    K = P.n_modes
    if grid.n < 16 * K:
        raise ValueError(f"grid too coarse: {K} modes need n >= {16 * K}, got {grid.n}")
    shifts = [basis_shift(k, grid) for k in range(1, K + 1)]
    stats = sample_path_stats(grid, n_samples, stream, shifts=shifts, workers=workers)
    exact = float(gaussian_expectation(P))
    return against_exact("chaos-bridge", "twofour", P(stats.ito), exact, threshold,
                         details={"P": repr(P)}, seed=stream.seed, grid_n=grid.n)
