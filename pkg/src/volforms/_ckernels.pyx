# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops over batches of Brownian increments and chaos monomials.

Signatures and semantics mirror :mod:`volforms._pykernels` exactly; that module
is the reference used when this extension is not built.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()


def path_stats(const double[:, ::1] dw, const double[:, ::1] weights,
               const Py_ssize_t[::1] nodes):
    """One pass over each path: weighted increment sums, node values, sum of squares.

    ``nodes`` must be sorted ascending with entries in ``0..n``.
    """
    cdef Py_ssize_t n_paths = dw.shape[0]
    cdef Py_ssize_t n = dw.shape[1]
    cdef Py_ssize_t m = weights.shape[0]
    cdef Py_ssize_t k = nodes.shape[0]
    if m and weights.shape[1] != n:
        raise ValueError("weights and increments disagree on the number of steps")

    ito_arr = np.zeros((n_paths, m), dtype=np.float64)
    vals_arr = np.zeros((n_paths, k), dtype=np.float64)
    sq_arr = np.zeros(n_paths, dtype=np.float64)
    cdef double[:, ::1] ito = ito_arr
    cdef double[:, ::1] vals = vals_arr
    cdef double[::1] sq = sq_arr

    cdef Py_ssize_t p
    # paths are independent, so the parallel loop gives the same numbers as a serial one
    with nogil:
        for p in prange(n_paths, schedule="static"):
            _one_path(dw, weights, nodes, ito, vals, sq, p)
    return ito_arr, vals_arr, sq_arr


cdef inline void _one_path(const double[:, ::1] dw, const double[:, ::1] weights,
                           const Py_ssize_t[::1] nodes, double[:, ::1] ito, double[:, ::1] vals,
                           double[::1] sq, Py_ssize_t p) noexcept nogil:
    cdef Py_ssize_t n = dw.shape[1]
    cdef Py_ssize_t m = weights.shape[0]
    cdef Py_ssize_t k = nodes.shape[0]
    cdef Py_ssize_t i, r
    cdef Py_ssize_t j = 0
    cdef double w = 0.0
    cdef double s = 0.0
    cdef double x
    for i in range(n):
        while j < k and nodes[j] == i:
            vals[p, j] = w
            j += 1
        x = dw[p, i]
        for r in range(m):
            ito[p, r] += weights[r, i] * x
        s += x * x
        w += x
    while j < k and nodes[j] == n:
        vals[p, j] = w
        j += 1
    sq[p] = s


def poly_eval(const double[:, ::1] xi, const Py_ssize_t[:, ::1] exps,
              const double[::1] coeffs):
    """Evaluate sum_t coeffs[t] * prod_k xi[:, k] ** exps[t, k] for every row of ``xi``."""
    cdef Py_ssize_t n_rows = xi.shape[0]
    cdef Py_ssize_t n_modes = xi.shape[1]
    cdef Py_ssize_t n_terms = exps.shape[0]
    if n_terms and exps.shape[1] != n_modes:
        raise ValueError("exponent table and samples disagree on the number of modes")

    cdef Py_ssize_t max_deg = 0
    cdef Py_ssize_t t, q, d, row
    for t in range(n_terms):
        for q in range(n_modes):
            if exps[t, q] > max_deg:
                max_deg = exps[t, q]

    out_arr = np.zeros(n_rows, dtype=np.float64)
    pw_arr = np.empty((n_modes, max_deg + 1), dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[:, ::1] pw = pw_arr
    cdef double acc, term
    for row in range(n_rows):
        for q in range(n_modes):
            pw[q, 0] = 1.0
            for d in range(1, max_deg + 1):
                pw[q, d] = pw[q, d - 1] * xi[row, q]
        acc = 0.0
        for t in range(n_terms):
            term = coeffs[t]
            for q in range(n_modes):
                term *= pw[q, exps[t, q]]
            acc += term
        out[row] = acc
    return out_arr
