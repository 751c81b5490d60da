"""Time the compiled kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--paths 20000] [--grid-n 256]

Prints one line per kernel with the best-of-``repeat`` wall time of each
implementation, their speed ratio and the largest absolute difference between
their outputs.
"""

import argparse
import timeit

import numpy as np

from volforms import _kernels, _pykernels
from volforms._poly import monomials

try:
    from volforms import _ckernels
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None


def bench(label, fn_c, fn_py, repeat):
    t_py = min(timeit.repeat(fn_py, number=1, repeat=repeat))
    out_py = fn_py()
    if _ckernels is None:
        print(f"{label:<12} python {t_py * 1e3:9.2f} ms   (compiled extension not built)")
        return
    t_c = min(timeit.repeat(fn_c, number=1, repeat=repeat))
    out_c = fn_c()
    diff = max(float(np.abs(np.asarray(a) - np.asarray(b)).max()) for a, b in zip(_as_tuple(out_c), _as_tuple(out_py)))
    print(f"{label:<12} cython {t_c * 1e3:9.2f} ms   python {t_py * 1e3:9.2f} ms   "
          f"speedup {t_py / t_c:6.2f}x   max |diff| {diff:.2e}")


def _as_tuple(x):
    return x if isinstance(x, tuple) else (x,)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--paths", type=int, default=20000)
    ap.add_argument("--grid-n", type=int, default=256)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.grid_n
    dw = rng.standard_normal((args.paths, n)) / np.sqrt(n)
    weights = rng.standard_normal((3, n))
    nodes = np.array([n // 4, n // 2, n])

    exps = np.array(monomials(4, 4), dtype=np.intp)
    coeffs = rng.standard_normal(len(exps))
    xi = rng.standard_normal((args.paths, 4))

    print(f"default backend: {_kernels.BACKEND}; {args.paths} paths, n = {n}")
    bench("path_stats",
          lambda: _kernels.path_stats(dw, weights, nodes, impl=_ckernels),
          lambda: _kernels.path_stats(dw, weights, nodes, impl=_pykernels), args.repeat)
    bench("poly_eval",
          lambda: _kernels.poly_eval(xi, exps, coeffs, impl=_ckernels),
          lambda: _kernels.poly_eval(xi, exps, coeffs, impl=_pykernels), args.repeat)


if __name__ == "__main__":
    main()
