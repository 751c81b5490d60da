"""Sparse multivariate polynomials with exact coefficient arithmetic.

Coefficients are whatever numbers you put in (int, Fraction, float); the
arithmetic never rounds beyond what those types do. Zero coefficients are
dropped, so two polynomials are equal iff their term maps are equal.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping

import numpy as np

from . import _kernels

Exps = tuple[int, ...]


class Poly:
    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exps, object] | Iterable[tuple[Exps, object]] = ()):
        if nvars < 1:
            raise ValueError("need at least one variable")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Exps, object] = {}
        for e, c in items:
            e = tuple(int(a) for a in e)
            if len(e) != nvars or min(e) < 0:
                raise ValueError(f"bad exponent {e} for {nvars} variables")
            c = clean.get(e, 0) + c
            if c == 0:
                clean.pop(e, None)
            else:
                clean[e] = c
        self.nvars = nvars
        self.terms = clean
        self._hash = None

    @classmethod
    def constant(cls, nvars: int, c=1):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, k: int, c=1):
        e = [0] * nvars
        e[k] = 1
        return cls(nvars, {tuple(e): c})

    def _same(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def _lift(self, other):
        if isinstance(other, Poly):
            self._same(other)
            return other
        return type(self).constant(self.nvars, other)

    def __add__(self, other):
        other = self._lift(other)
        return type(self)(self.nvars, itertools.chain(self.terms.items(), other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return type(self)(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return type(self)(self.nvars, {e: c * other for e, c in self.terms.items()})
        self._same(other)
        out: dict[Exps, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return type(self)(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = type(self).constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        return self == self._lift(other)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return f"{type(self).__name__}({self.nvars}, 0)"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"x{k + 1}" + (f"^{a}" if a > 1 else "") for k, a in enumerate(e) if a)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return f"{type(self).__name__}({self.nvars}, {' + '.join(parts)})"

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def deriv(self, k: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[k]:
                e2 = list(e)
                e2[k] -= 1
                out[tuple(e2)] = c * e[k]
        return type(self)(self.nvars, out)

    def gradient(self) -> list["Poly"]:
        return [self.deriv(k) for k in range(self.nvars)]

    def table(self) -> tuple[np.ndarray, np.ndarray]:
        """Exponent table ``(T, nvars)`` and float coefficients ``(T,)``."""
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=np.intp), np.zeros(0)
        exps = np.array(list(self.terms), dtype=np.intp)
        coeffs = np.array([float(c) for c in self.terms.values()])
        return exps, coeffs

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(..., nvars)`` in floating point."""
        x = np.asarray(x, dtype=np.float64)
        lead = x.shape[:-1]
        if x.shape[-1] != self.nvars:
            raise ValueError(f"expected trailing dimension {self.nvars}, got {x.shape}")
        exps, coeffs = self.table()
        out = _kernels.poly_eval(x.reshape(-1, self.nvars), exps, coeffs)
        return out.reshape(lead)


def monomials(nvars: int, max_degree: int) -> list[Exps]:
    """All exponent tuples of total degree <= max_degree, graded then lexicographic."""
    out = []
    for d in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for k in combo:
                e[k] += 1
            out.append(tuple(e))
    return out


def random_poly(nvars: int, max_degree: int, rng: np.random.Generator, low: int = -3, high: int = 3,
                density: float = 0.6, cls=Poly) -> Poly:
    """Random polynomial with integer coefficients in ``[low, high]``."""
    terms = {}
    for e in monomials(nvars, max_degree):
        if rng.random() < density:
            terms[e] = int(rng.integers(low, high + 1))
    return cls(nvars, terms)
