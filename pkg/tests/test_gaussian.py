import cmath
import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from volforms.estimator import RngStream
from volforms.gaussian import (
    QuadratureError, covariance_check, dx_normalization, fourier_lhs_closed_form, fourier_lhs_quadrature,
    fourier_rhs, make_spec, random_spd, verify_fourier, write_quadrature_csv,
)


# ---------------------------------------------------------------- make_spec

def test_identity_is_self_dual():
    spec = make_spec(np.eye(3))
    assert np.array_equal(spec.W, np.eye(3))


def test_diagonal_inverse():
    spec = make_spec(np.diag([2.0, 8.0]))
    np.testing.assert_allclose(spec.W, np.diag([0.5, 0.125]), rtol=0, atol=1e-15)


@pytest.mark.parametrize("Q,s", [
    (np.diag([1.0, -1.0]), 1),
    ([[1.0, 2.0], [0.0, 1.0]], 1),
    (np.zeros((2, 2)), 1),
    (np.diag([1.0, 0.0]), "i"),
    (np.ones((2, 3)), 1),
])
def test_invalid_forms_rejected(Q, s):
    with pytest.raises(ValueError):
        make_spec(Q, s)


def test_invalid_s_rejected():
    with pytest.raises(ValueError):
        make_spec(np.eye(1), 2)


def test_indefinite_allowed_for_fresnel():
    spec = make_spec(np.diag([1.0, -2.0]), "i")
    assert spec.s == 1j


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 4))
def test_duality_is_an_involution(seed, dim):
    Q = random_spd(dim, np.random.default_rng(seed))
    spec = make_spec(Q)
    back = make_spec(spec.W)
    assert np.abs(back.W - spec.Q).max() <= 1e-10 * max(1.0, np.abs(Q).max())
    assert np.abs(spec.Q @ spec.W - np.eye(dim)).max() <= 1e-12


def test_random_spd_condition_bound(rng):
    for dim in (1, 2, 3):
        lam = np.linalg.eigvalsh(random_spd(dim, rng))
        assert lam.min() > 0 and lam.max() / lam.min() <= 1e3 * (1 + 1e-9)


# ---------------------------------------------------------------- normalization

def test_normalization_values():
    assert dx_normalization(make_spec(np.eye(1))) == 1
    assert dx_normalization(make_spec(np.diag([2.0, 8.0]))) == pytest.approx(4.0, abs=1e-14)
    assert dx_normalization(make_spec(np.eye(1), "i")) == pytest.approx(cmath.exp(-1j * math.pi / 4), abs=1e-15)


def test_normalization_matches_determinant_formula_for_positive_forms(rng):
    for _ in range(5):
        Q = random_spd(3, rng)
        for s in (1, 1j):
            nu = dx_normalization(make_spec(Q, s))
            assert nu == pytest.approx(s ** -1.5 * math.sqrt(np.linalg.det(Q)), rel=1e-12)


def _fresnel_1d(q, xp):
    # int exp(i pi q x^2 - 2 pi i xp x) dx along x = e^{i pi/4 sgn q} u, where it decays like a Gaussian
    rot = mpmath.exp(1j * mpmath.pi / 4 * (1 if q > 0 else -1))
    f = lambda u: rot * mpmath.exp(1j * mpmath.pi * q * (rot * u) ** 2 - 2j * mpmath.pi * xp * rot * u)
    return complex(mpmath.quad(f, [-mpmath.inf, 0, mpmath.inf]))


@pytest.mark.parametrize("q,xp", [(1.0, 0.0), (1.0, 1.0), (2.0, 0.7), (-1.5, 0.4), (0.5, -1.3)])
def test_fresnel_closed_form_matches_rotated_contour(q, xp):
    spec = make_spec([[q]], "i")
    oracle = dx_normalization(spec) * _fresnel_1d(q, xp)
    assert abs(fourier_lhs_closed_form(spec, [xp]) - oracle) < 1e-12
    assert abs(fourier_rhs(spec, [xp]) - oracle) < 1e-12


def test_fresnel_normalization_at_zero_is_one():
    spec = make_spec([[1.0]], "i")
    assert abs(dx_normalization(spec) * _fresnel_1d(1.0, 0.0) - 1) < 1e-13


# ---------------------------------------------------------------- Fourier identity

def test_zero_frequency_normalization():
    rep = verify_fourier(make_spec(np.diag([2.0, 8.0])), [0.0, 0.0])
    assert rep.passed and rep.rhs == 1 and abs(rep.lhs - 1) < 1e-10


def test_one_dimensional_example():
    spec = make_spec([[2.0]])
    rep = verify_fourier(spec, [1.0])
    assert rep.rhs == pytest.approx(math.exp(-math.pi / 2), rel=1e-15)
    assert rep.passed and rep.discrepancy <= 1e-6


def test_quadrature_against_scipy_in_two_dimensions():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    xp = np.array([0.3, -0.4])
    spec = make_spec(Q)
    f = lambda y, x: math.exp(-math.pi * (np.array([x, y]) @ Q @ np.array([x, y]))) * math.cos(
        2 * math.pi * (xp[0] * x + xp[1] * y))
    val, err = integrate.dblquad(f, -6, 6, -6, 6, epsabs=1e-12, epsrel=1e-12)
    lhs, _ = fourier_lhs_quadrature(spec, xp, 32)
    assert abs(lhs - dx_normalization(spec) * val) < 1e-9


def test_fresnel_example():
    rep = verify_fourier(make_spec([[1.0]], "i"), [1.0])
    assert rep.rhs == pytest.approx(cmath.exp(-1j * math.pi), abs=1e-15)
    assert rep.passed and rep.discrepancy <= 1e-12 and rep.equation == "defDx"


def test_random_forms_pass_quadrature(rng):
    for _ in range(20):
        dim = int(rng.integers(1, 4))
        Q = random_spd(dim, rng)
        xp = rng.uniform(-1, 1, dim)
        xp *= min(1.0, 2.0 / np.linalg.norm(xp))
        rep = verify_fourier(make_spec(Q), xp)
        assert rep.passed, rep.discrepancy


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 5))
def test_fresnel_identity_for_indefinite_forms(seed, dim):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.3, 3.0, dim) * rng.choice([-1, 1], dim)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    spec = make_spec((q * lam) @ q.T, "i")
    rep = verify_fourier(spec, rng.uniform(-1, 1, dim))
    assert rep.discrepancy <= 1e-12


def test_monte_carlo_fourier():
    rep = verify_fourier(make_spec(np.diag([1.0, 2.0])), [0.3, 0.2], method="mc", stream=RngStream(4))
    assert rep.passed


def test_method_errors():
    spec = make_spec(np.eye(4))
    with pytest.raises(ValueError):
        verify_fourier(spec, np.zeros(4))
    with pytest.raises(ValueError):
        verify_fourier(make_spec(np.eye(1)), [0.0], method="simpson")
    with pytest.raises(ValueError):
        verify_fourier(make_spec(np.eye(2)), [0.0])
    with pytest.raises(ValueError):
        fourier_lhs_quadrature(make_spec(np.eye(1), "i"), [0.0], 8)


def test_quadrature_budget():
    with pytest.raises(QuadratureError):
        fourier_lhs_quadrature(make_spec(np.eye(3)), np.zeros(3), 200)


def test_quadrature_csv_round_trip():
    spec = make_spec([[2.0]])
    total, table = fourier_lhs_quadrature(spec, [0.5], 8)
    buf = io.StringIO()
    write_quadrature_csv(buf, table)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "point,weight,value" and len(lines) == 9
    w = [float(r.split(",")[1]) for r in lines[1:]]
    assert sum(w) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


# ---------------------------------------------------------------- covariance

@pytest.mark.parametrize("Q", [np.eye(1), np.diag([2.0, 8.0]), np.array([[2.0, 0.8], [0.8, 1.0]])])
def test_covariance(Q):
    rep = covariance_check(make_spec(Q), 50_000, RngStream(9))
    assert rep.passed and rep.equation == "finite"


def test_covariance_entries_example():
    rep = covariance_check(make_spec(np.diag([2.0, 8.0])), 50_000, RngStream(10))
    cases = {c["identity"]: c for c in rep.details["cases"]}
    assert cases["covariance[0,0]"]["rhs"] == 0.5
    assert cases["covariance[1,1]"]["rhs"] == 0.125
    assert rep.passed


def test_covariance_requires_euclidean():
    with pytest.raises(ValueError):
        covariance_check(make_spec(np.eye(1), "i"), 100, RngStream(0))
