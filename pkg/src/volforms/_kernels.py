"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``VOLFORMS_PURE=1`` in the environment to force the numpy implementations.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("VOLFORMS_PURE"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels


def path_stats(dw, weights, nodes, impl=None):
    """Weighted increment sums, values at ``nodes`` and sum of squared increments.

    Returns ``(ito, vals, sq)`` with shapes ``(N, m)``, ``(N, k)``, ``(N,)``.
    ``nodes`` may be in any order; columns of ``vals`` follow it.
    """
    impl = impl or _impl
    dw = np.ascontiguousarray(dw, dtype=np.float64)
    weights = np.ascontiguousarray(np.atleast_2d(weights), dtype=np.float64)
    if weights.size == 0:
        weights = np.zeros((0, dw.shape[1]))
    nodes = np.asarray(nodes, dtype=np.intp).reshape(-1)
    n = dw.shape[1]
    if nodes.size and (nodes.min() < 0 or nodes.max() > n):
        raise IndexError(f"node index out of range 0..{n}")
    order = np.argsort(nodes, kind="stable")
    ito, vals, sq = impl.path_stats(dw, weights, np.ascontiguousarray(nodes[order]))
    if nodes.size:
        unsorted = np.empty_like(vals)
        unsorted[:, order] = vals
        vals = unsorted
    return ito, vals, sq


def poly_eval(xi, exps, coeffs, impl=None):
    """Evaluate a polynomial given as an exponent table on each row of ``xi``."""
    impl = impl or _impl
    xi = np.ascontiguousarray(np.atleast_2d(xi), dtype=np.float64)
    exps = np.ascontiguousarray(np.asarray(exps, dtype=np.intp).reshape(-1, xi.shape[1]))
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    return impl.poly_eval(xi, exps, coeffs)
