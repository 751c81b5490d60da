from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite_e

from volforms._poly import Poly, random_poly
from volforms.chaos import (
    ChaosPoly, ModeVector, annihilation, apply_A, apply_D, creation, gaussian_expectation, hermite,
    mc_bridge, totality_rank, vacuum, vacuum_nullspace_dim, verify_adjointness, verify_adjointness_random,
    verify_commutators, verify_hermite, xi,
)
from volforms.estimator import RngStream
from volforms.paths import Grid

e1, e2 = ModeVector.basis(1, 2), ModeVector.basis(2, 2)


# ---------------------------------------------------------------- polynomial container

def test_zero_terms_are_dropped():
    p = Poly(2, {(1, 0): 1, (0, 1): 0}) + Poly(2, {(1, 0): -1})
    assert p.terms == {} and p == Poly(2)


def test_poly_arithmetic_exact_with_fractions():
    x = Poly.variable(1, 0, Fraction(1, 3))
    assert (x * 3) ** 2 == Poly(1, {(2,): 1})
    assert (x - x) == 0


def test_mode_count_mismatch():
    with pytest.raises(ValueError):
        apply_D(ModeVector.basis(1, 3), xi(1, 2))
    with pytest.raises(ValueError):
        Poly(2) + Poly(3)


# ---------------------------------------------------------------- operators

def test_D_examples():
    assert apply_D(e1, vacuum(2)) == 0
    assert apply_D(e1, xi(1, 2)) == 1
    assert apply_D(e2, xi(1, 2) ** 2 * xi(2, 2)) == xi(1, 2) ** 2


def test_A_examples():
    assert apply_A(e1, vacuum(2)) == xi(1, 2)
    assert apply_A(e1, xi(1, 2)) == xi(1, 2) ** 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), deg=st.integers(0, 4))
def test_A_raises_degree_by_one(seed, deg):
    rng = np.random.default_rng(seed)
    P = random_poly(2, deg, rng, cls=ChaosPoly)
    if not P:
        return
    phi = ModeVector((int(rng.integers(1, 4)), int(rng.integers(-3, 0))))
    assert apply_A(phi, P).degree == P.degree + 1


def test_creation_on_vacuum_gives_hermite():
    one = vacuum(2)
    assert creation(e1, one) == xi(1, 2)
    assert creation(e1, creation(e1, one)) == xi(1, 2) ** 2 - 1


def test_orthogonal_modes_commute(rng):
    for _ in range(10):
        P = random_poly(2, 4, rng, cls=ChaosPoly)
        assert annihilation(e1, creation(e2, P)) - creation(e2, annihilation(e1, P)) == 0


def test_ccr_single_mode():
    e = ModeVector.basis(1, 1)
    P = xi(1, 1)
    assert apply_D(e, apply_A(e, P)) - apply_A(e, apply_D(e, P)) == P


def test_gaussian_expectation_moments():
    assert gaussian_expectation(vacuum(2)) == 1
    assert gaussian_expectation(xi(1, 2) ** 2) == 1
    assert gaussian_expectation(xi(1, 2) ** 4 * xi(2, 2) ** 2) == 3
    assert gaussian_expectation(xi(1, 2) ** 3) == 0
    assert gaussian_expectation(xi(1, 1) ** 8) == 105


def test_gaussian_expectation_against_numerical_quadrature():
    # Gauss-Hermite_e nodes integrate polynomials of degree < 2m exactly against N(0, 1)
    x, w = hermite_e.hermegauss(10)
    w = w / w.sum()
    P = ChaosPoly(2, {(4, 2): 2, (2, 0): -3, (1, 1): 5, (0, 6): 1})
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    vals = P(np.stack([X1.ravel(), X2.ravel()], axis=1)).reshape(X1.shape)
    assert float((W * vals).sum()) == pytest.approx(float(gaussian_expectation(P)), abs=1e-10)


@pytest.mark.parametrize("k", range(7))
def test_hermite_recursion_matches_numpy_hermite_e(k):
    coeffs = hermite_e.herme2poly([0] * k + [1])
    oracle = ChaosPoly(1, {(j,): int(round(c)) for j, c in enumerate(coeffs)})
    assert hermite(k) == oracle


def test_he4_explicit():
    x = xi(1, 1)
    assert hermite(4) == x**4 - 6 * x**2 + 3


# ---------------------------------------------------------------- verifications

def test_commutators_exact():
    rep = verify_commutators(4, 4, 50, RngStream(1))
    assert rep.passed and rep.discrepancy == 0 and rep.details["counterexample"] is None


def test_adjointness_examples():
    one = vacuum(1)
    e = ModeVector.basis(1, 1)
    rep = verify_adjointness(one, one, e)
    assert rep.lhs == rep.rhs == 0
    rep = verify_adjointness(xi(1, 1), one, e)
    assert rep.lhs == rep.rhs == 1


def test_adjointness_random_exact():
    rep = verify_adjointness_random(4, 4, 50, RngStream(2))
    assert rep.passed and rep.discrepancy == 0


def test_hermite_verification():
    rep = verify_hermite(6)
    assert rep.passed and rep.details["mismatched_k"] == []


def test_adjointness_fails_for_plain_multiplication():
    # E[D(xi^2) xi] = 2 while E[xi^2 * A xi] = E[xi^4] = 3, so A alone is not the adjoint
    from volforms.chaos import expectation_inner
    e = ModeVector.basis(1, 1)
    F, G = xi(1, 1) ** 2, xi(1, 1)
    assert expectation_inner(apply_D(e, F), G) != expectation_inner(F, apply_A(e, G))
    assert verify_adjointness(F, G, e).passed


@pytest.mark.parametrize("K,cap", [(1, 4), (2, 3), (3, 2)])
def test_vacuum_is_unique(K, cap):
    assert vacuum_nullspace_dim(K, cap) == (1, True)


@pytest.mark.parametrize("use_creation", [False, True])
def test_products_are_total(use_creation):
    rank, dim = totality_rank(2, 4, use_creation)
    assert rank == dim


@pytest.mark.parametrize("P,exact", [
    (xi(1, 2) ** 2, 1), (xi(1, 2) * xi(2, 2), 0), (xi(1, 2) ** 4, 3),
])
def test_mc_bridge_moments(P, exact):
    rep = mc_bridge(P, Grid(128), 20_000, RngStream(3))
    assert rep.rhs == exact and rep.passed


def test_mc_bridge_grid_too_coarse():
    with pytest.raises(ValueError):
        mc_bridge(xi(1, 4) ** 2, Grid(32), 100, RngStream(0))
