import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volforms._poly import Poly
from volforms.expr import ExprError, parse


def test_evaluation_examples():
    x = np.array([[2.0, 3.0]])
    assert parse("w1 + w2")(x)[0] == 5
    assert parse("w1*w2 - 1")(x)[0] == 5
    assert parse("-w1^2")(x)[0] == -4
    assert parse("(-w1)^2")(x)[0] == 4
    assert parse("exp(-w1^2)")(x)[0] == pytest.approx(math.exp(-4))
    assert parse("w2^-1")(x)[0] == pytest.approx(1 / 3)
    assert parse("1.5e-1 * w1")(x)[0] == pytest.approx(0.3)
    assert parse(".5")(x)[0] == 0.5


def test_precedence():
    x = np.array([[2.0]])
    assert parse("1 + 2 * w1 ^ 2")(x)[0] == 9
    assert parse("1 - w1 - w1")(x)[0] == -3
    assert parse("- - w1")(x)[0] == 2
    assert parse("+w1")(x)[0] == 2


def test_vectorized():
    e = parse("w1 * exp(w2)")
    x = np.random.default_rng(0).standard_normal((50, 2))
    np.testing.assert_allclose(e(x), x[:, 0] * np.exp(x[:, 1]))
    assert parse("3")(x).shape == (50,)


@pytest.mark.parametrize("text", ["", "w1 +", "w0", "x1", "w1 ^ w2", "exp w1", "(w1", "w1)", "sin(w1)", "w1 # 2", "w1^2^2",
                                  "2 w1"])
def test_syntax_errors(text):
    with pytest.raises(ExprError):
        parse(text)


def test_too_few_values():
    with pytest.raises(ExprError):
        parse("w3")(np.zeros((1, 2)))


def test_symbol_count():
    assert parse("w1 + w4").n_vars == 4
    assert parse("2").n_vars == 0


def test_gradient_examples():
    x = np.array([[0.5, -1.0]])
    np.testing.assert_allclose(parse("w1^2 * w2")
                               .gradient(x), [[2 * 0.5 * -1.0, 0.25]])
    np.testing.assert_allclose(parse("exp(-w1^2)").gradient(x)[:, 0], [-2 * 0.5 * math.exp(-0.25)])


_atoms = st.sampled_from(["w1", "w2", "1", "2.5", "0.5"])


@st.composite
def expressions(draw, depth=3):
    if depth == 0:
        return draw(_atoms)
    kind = draw(st.sampled_from(["atom", "add", "sub", "mul", "pow", "neg", "exp"]))
    if kind == "atom":
        return draw(_atoms)
    a = draw(expressions(depth - 1))
    if kind == "neg":
        return f"-({a})"
    if kind == "exp":
        return f"exp(0.1*({a}))"
    if kind == "pow":
        return f"({a})^{draw(st.integers(0, 3))}"
    b = draw(expressions(depth - 1))
    op = {"add": "+", "sub": "-", "mul": "*"}[kind]
    return f"({a}){op}({b})"


@settings(max_examples=80, deadline=None)
@given(text=expressions())
def test_symbolic_gradient_matches_central_differences(text):
    e = parse(text)
    x = np.array([[0.3, -0.7]])
    g = e.gradient(x)[0]
    h = 1e-6
    for k in range(2):
        d = np.zeros((1, 2))
        d[0, k] = h
        fd = (e(x + d)[0] - e(x - d)[0]) / (2 * h)
        assert g[k] == pytest.approx(fd, rel=1e-5, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(text=expressions())
def test_python_evaluation_agrees(text):
    # the grammar is a subset of Python once ^ becomes ** and exp is bound
    e = parse(text)
    w1, w2 = 0.3, -0.7
    expected = eval(text.replace("^", "**"), {"exp": math.exp, "w1": w1, "w2": w2})
    assert e(np.array([[w1, w2]]))[0] == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_to_poly():
    p = parse("(w1 + 1)^2 - 2*w2").to_poly(2)
    w1, w2 = Poly.variable(2, 0), Poly.variable(2, 1)
    assert p == (w1 + 1) ** 2 - w2 * 2
    with pytest.raises(ExprError):
        parse("exp(w1)").to_poly()
    with pytest.raises(ExprError):
        parse("w1^0.5").to_poly()
    with pytest.raises(ExprError):
        parse("w3").to_poly(2)


def test_growth_bounds():
    assert parse("3*w1^2 + w2").growth() == (4.0, 2.0)
    assert parse("exp(-w1^2)").growth() == (1.0, 0.0)
    assert parse("exp(w1)").growth() is None
    assert parse("w1^-1").growth() is None


@settings(max_examples=40, deadline=None)
@given(text=expressions(depth=2), scale=st.floats(0, 20))
def test_growth_bound_holds(text, scale):
    e = parse(text)
    bound = e.growth()
    if bound is None:
        return
    C, p = bound
    x = np.array([[scale, -scale], [scale, scale], [-scale, 0.5 * scale]])
    assert np.all(np.abs(e(x)) <= C * (1 + scale) ** p * (1 + 1e-12) + 1e-12)
