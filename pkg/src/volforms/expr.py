"""A tiny expression language for cylinder functionals on the command line.

Symbols ``w1 .. wm`` stand for w(t_1) .. w(t_m). Supported: numbers, ``+``,
``-`` (binary and unary), ``*``, ``^`` with a numeric exponent, ``exp(...)``
and parentheses. Expressions evaluate vectorized over ``(N, m)`` arrays and
differentiate symbolically. See docs/expr.md for the grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ._poly import Poly

__all__ = ["Expr", "ExprError", "parse"]

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|(?P<var>w\d+)|(?P<fn>exp)|(?P<op>[-+*^()]))")


class ExprError(ValueError):
    pass


# AST nodes are tuples: ("num", c), ("var", k), ("neg", a), ("add", a, b),
# ("sub", a, b), ("mul", a, b), ("pow", a, c), ("exp", a)


def _tokenize(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprError(f"unexpected character {text[pos:].strip()[:1]!r} at position {pos}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ExprError(f"expected {value or 'a token'}, got {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.sum()
        if self.peek()[0] is not None:
            raise ExprError(f"trailing input at {self.peek()[1]!r}")
        return node

    def sum(self):
        node = self.product()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = ("add" if op == "+" else "sub", node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.peek()[1] == "*":
            self.take()
            node = ("mul", node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return ("neg", self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            sign = 1.0
            if self.peek()[1] == "-":
                self.take()
                sign = -1.0
            kind, val = self.take()
            if kind != "num":
                raise ExprError("exponents must be numbers")
            return ("pow", base, sign * float(val))
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", float(val))
        if kind == "var":
            k = int(val[1:])
            if k < 1:
                raise ExprError("symbols start at w1")
            return ("var", k - 1)
        if kind == "fn":
            self.take("(")
            inner = self.sum()
            self.take(")")
            return ("exp", inner)
        if val == "(":
            inner = self.sum()
            self.take(")")
            return inner
        raise ExprError(f"unexpected {val!r}")


def _eval(node, x):
    tag = node[0]
    if tag == "num":
        return np.full(x.shape[0], node[1])
    if tag == "var":
        return x[:, node[1]]
    if tag == "neg":
        return -_eval(node[1], x)
    if tag == "add":
        return _eval(node[1], x) + _eval(node[2], x)
    if tag == "sub":
        return _eval(node[1], x) - _eval(node[2], x)
    if tag == "mul":
        return _eval(node[1], x) * _eval(node[2], x)
    if tag == "pow":
        c = node[2]
        base = _eval(node[1], x)
        return base ** int(c) if c == int(c) and c >= 0 else base**c
    if tag == "exp":
        return np.exp(_eval(node[1], x))
    raise AssertionError(tag)


def _deriv(node, k):
    tag = node[0]
    if tag == "num":
        return ("num", 0.0)
    if tag == "var":
        return ("num", 1.0 if node[1] == k else 0.0)
    if tag == "neg":
        return ("neg", _deriv(node[1], k))
    if tag in ("add", "sub"):
        return (tag, _deriv(node[1], k), _deriv(node[2], k))
    if tag == "mul":
        a, b = node[1], node[2]
        return ("add", ("mul", _deriv(a, k), b), ("mul", a, _deriv(b, k)))
    if tag == "pow":
        a, c = node[1], node[2]
        if c == 0:
            return ("num", 0.0)
        return ("mul", ("mul", ("num", c), ("pow", a, c - 1)), _deriv(a, k))
    if tag == "exp":
        return ("mul", node, _deriv(node[1], k))
    raise AssertionError(tag)


def _to_poly(node, nvars: int) -> Poly:
    tag = node[0]
    if tag == "num":
        c = node[1]
        return Poly.constant(nvars, int(c) if c == int(c) else c)
    if tag == "var":
        return Poly.variable(nvars, node[1])
    if tag == "neg":
        return -_to_poly(node[1], nvars)
    if tag in ("add", "sub", "mul"):
        a, b = _to_poly(node[1], nvars), _to_poly(node[2], nvars)
        return a + b if tag == "add" else (a - b if tag == "sub" else a * b)
    if tag == "pow":
        c = node[2]
        if c != int(c) or c < 0:
            raise ExprError("only non-negative integer powers are polynomial")
        return _to_poly(node[1], nvars) ** int(c)
    raise ExprError("exp(...) is not a polynomial")


def _max_var(node) -> int:
    if node[0] == "var":
        return node[1] + 1
    return max((_max_var(c) for c in node[1:] if isinstance(c, tuple)), default=0)


def _growth(node):
    # (C, p) with |f| <= C (1 + max|x|)^p, or None when an exp can grow
    tag = node[0]
    if tag == "num":
        return abs(node[1]), 0.0
    if tag == "var":
        return 1.0, 1.0
    if tag == "neg":
        return _growth(node[1])
    if tag in ("add", "sub", "mul"):
        a, b = _growth(node[1]), _growth(node[2])
        if a is None or b is None:
            return None
        if tag == "mul":
            return a[0] * b[0], a[1] + b[1]
        return a[0] + b[0], max(a[1], b[1])
    if tag == "pow":
        a = _growth(node[1])
        c = node[2]
        if a is None or c < 0 or c != int(c):
            return None
        return a[0] ** c, a[1] * c
    if tag == "exp":
        inner = node[1]
        # exp of minus a square is bounded by 1
        if inner[0] == "neg" and inner[1][0] == "pow" and inner[1][2] % 2 == 0 and inner[1][2] > 0:
            return 1.0, 0.0
        return None
    raise AssertionError(tag)


@dataclass(frozen=True)
class Expr:
    text: str
    tree: tuple
    n_vars: int

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        self._check(x)
        return _eval(self.tree, x)

    def gradient(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        self._check(x)
        return np.stack([_eval(_deriv(self.tree, k), x) for k in range(x.shape[1])], axis=-1)

    def growth(self):
        return _growth(self.tree)

    def to_poly(self, nvars: int | None = None) -> Poly:
        """The expression as an exact polynomial in w1..wD; fails on exp or non-integer powers."""
        nvars = nvars or max(self.n_vars, 1)
        if self.n_vars > nvars:
            raise ExprError(f"{self.text!r} uses w{self.n_vars} but the dimension is {nvars}")
        return _to_poly(self.tree, nvars)

    def _check(self, x):
        if x.shape[1] < self.n_vars:
            raise ExprError(f"{self.text!r} uses w{self.n_vars} but only {x.shape[1]} values were given")


def parse(text: str) -> Expr:
    tree = _Parser(text).parse()
    return Expr(text, tree, _max_var(tree))
