"""Time the numba and numpy back ends of the oracle kernels on the same sector.

    python3 benchmarks/bench_kernels.py [--modes 200] [--nmax 2] [--repeat 5]

The numpy side is the scipy CSR product; the numba side is the njit/prange
loop. Both run on one Hamiltonian and the script checks that they agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from subdyn import _kernels
from subdyn.model import ModelSpec
from subdyn.oracle import Oracle, chebyshev_coefficients


def _best(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, default=200)
    ap.add_argument("--nmax", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    o = Oracle(ModelSpec(), n_modes=args.modes, n_max=args.nmax)
    _, H = o.odd
    ip, ix, d = H.indptr, H.indices, H.data.astype(float)
    n = H.shape[0]
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    absrow = np.abs(H).sum(axis=1).A1
    lo, hi = float((2 * H.diagonal() - absrow).min()), float(absrow.max())
    scale, shift = 0.5 * (hi - lo) * 1.01, 0.5 * (hi + lo)
    coeffs = chebyshev_coefficients(scale, shift, 200.0 / scale)

    print(f"sector dimension {n}, nnz {H.nnz}, {len(coeffs)} Chebyshev terms, "
          f"{_kernels.configure_threads()} numba threads")
    backends = ["numpy"] + (["numba"] if _kernels.numba is not None else [])
    if "numba" in backends:   # compile outside the timed region
        _kernels.matvec(ip, ix, d, psi, backend="numba")
        _kernels.chebyshev_apply(ip, ix, d, psi, coeffs[:3], scale, shift, backend="numba")
    results = {}
    for b in backends:
        tm, vm = _best(lambda: _kernels.matvec(ip, ix, d, psi, backend=b), args.repeat)
        tc, vc = _best(lambda: _kernels.chebyshev_apply(ip, ix, d, psi, coeffs, scale, shift,
                                                         backend=b), args.repeat)
        results[b] = (vm, vc)
        print(f"{b:>6}: matvec {tm * 1e3:8.3f} ms   chebyshev step {tc * 1e3:9.2f} ms")
    if len(results) == 2:
        dm = np.max(np.abs(results["numpy"][0] - results["numba"][0]))
        dc = np.max(np.abs(results["numpy"][1] - results["numba"][1]))
        print(f"max |numpy − numba|: matvec {dm:.2e}, chebyshev {dc:.2e}")


if __name__ == "__main__":
    main()
