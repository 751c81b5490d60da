"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""

import numpy as np


def path_stats(dw, weights, nodes):
    """One pass over each path: weighted increment sums, node values, sum of squares.

    ``nodes`` must be sorted ascending with entries in ``0..n``.
    """
    dw = np.asarray(dw, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n_paths, n = dw.shape
    if weights.shape[0] and weights.shape[1] != n:
        raise ValueError("weights and increments disagree on the number of steps")
    ito = dw @ weights.T if weights.shape[0] else np.zeros((n_paths, 0))
    cum = np.zeros((n_paths, n + 1))
    np.cumsum(dw, axis=1, out=cum[:, 1:])
    vals = cum[:, np.asarray(nodes, dtype=np.intp)]
    sq = np.einsum("ij,ij->i", dw, dw)
    return ito, vals, sq


def poly_eval(xi, exps, coeffs):
    """Evaluate sum_t coeffs[t] * prod_k xi[:, k] ** exps[t, k] for every row of ``xi``."""
    xi = np.asarray(xi, dtype=np.float64)
    exps = np.asarray(exps, dtype=np.intp)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n_rows, n_modes = xi.shape
    if exps.shape[0] == 0:
        return np.zeros(n_rows)
    if exps.shape[1] != n_modes:
        raise ValueError("exponent table and samples disagree on the number of modes")
    max_deg = int(exps.max())
    pw = np.ones((max_deg + 1, n_rows, n_modes))
    for d in range(1, max_deg + 1):
        pw[d] = pw[d - 1] * xi
    out = np.zeros(n_rows)
    cols = np.arange(n_modes)
    for c, e in zip(coeffs, exps):
        out += c * np.prod(pw[e, :, cols], axis=0)
    return out
