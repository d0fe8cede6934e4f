"""Hot loops of the oracle: CSR mat-vec and the Chebyshev propagator recurrence.

Two interchangeable back ends share one signature. The numba one is used by
default; set SUBDYN_NO_NUMBA=1 to force the scipy/numpy one. SUBDYN_THREADS
caps the numba thread pool.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

try:  # numba is a hard dependency, but the fallback keeps the oracle usable without it
    import numba
    from numba import njit, prange
except ImportError:  # pragma: no cover
    numba = None

if numba is not None and "NUMBA_THREADING_LAYER" not in os.environ:
    # the default search tries TBB first and warns when the installed one is too old
    try:
        from numba.np.ufunc import omppool  # noqa: F401
        numba.config.THREADING_LAYER = "omp"
    except ImportError:  # pragma: no cover
        numba.config.THREADING_LAYER = "workqueue"

DISABLED = os.environ.get("SUBDYN_NO_NUMBA", "") == "1"
BACKEND = "numpy" if (DISABLED or numba is None) else "numba"


def configure_threads(n: int | None = None) -> int:
    """Apply SUBDYN_THREADS (or ``n``) to the numba pool; returns the thread count in use."""
    if BACKEND != "numba":
        return 1
    if n is None:
        env = os.environ.get("SUBDYN_THREADS")
        n = int(env) if env else None
    if n is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


# --- numpy back end ------------------------------------------------------

def _matvec_np(indptr, indices, data, x):
    n = len(indptr) - 1
    return sp.csr_matrix((data, indices, indptr), shape=(n, n)) @ x


def _cheb_np(indptr, indices, data, psi, coeffs, scale, shift):
    n = len(indptr) - 1
    H = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    t0 = psi.copy()
    acc = coeffs[0] * t0
    if len(coeffs) == 1:
        return acc
    t1 = (H @ t0 - shift * t0) / scale
    acc += coeffs[1] * t1
    for k in range(2, len(coeffs)):
        t2 = 2.0 * (H @ t1 - shift * t1) / scale - t0
        acc += coeffs[k] * t2
        t0, t1 = t1, t2
    return acc


# --- numba back end ------------------------------------------------------

if numba is not None:

    @njit(parallel=True, cache=True)
    def _matvec_nb(indptr, indices, data, x):
        n = indptr.shape[0] - 1
        out = np.zeros(n, dtype=np.complex128)
        for i in prange(n):
            s = 0j
            for p in range(indptr[i], indptr[i + 1]):
                s += data[p] * x[indices[p]]
            out[i] = s
        return out

    @njit(parallel=True, cache=True)
    def _cheb_nb(indptr, indices, data, psi, coeffs, scale, shift):
        n = indptr.shape[0] - 1
        t0 = psi.copy()
        acc = coeffs[0] * t0
        if coeffs.shape[0] == 1:
            return acc
        t1 = np.empty(n, dtype=np.complex128)
        for i in prange(n):
            s = 0j
            for p in range(indptr[i], indptr[i + 1]):
                s += data[p] * t0[indices[p]]
            t1[i] = (s - shift * t0[i]) / scale
            acc[i] += coeffs[1] * t1[i]
        t2 = np.empty(n, dtype=np.complex128)
        for k in range(2, coeffs.shape[0]):
            c = coeffs[k]
            for i in prange(n):
                s = 0j
                for p in range(indptr[i], indptr[i + 1]):
                    s += data[p] * t1[indices[p]]
                t2[i] = 2.0 * (s - shift * t1[i]) / scale - t0[i]
                acc[i] += c * t2[i]
            t0, t1, t2 = t1, t2, t0
        return acc


def matvec(indptr, indices, data, x, backend: str | None = None):
    b = backend or BACKEND
    if b == "numba":
        return _matvec_nb(indptr, indices, data, np.ascontiguousarray(x, dtype=np.complex128))
    return _matvec_np(indptr, indices, data, x)


def chebyshev_apply(indptr, indices, data, psi, coeffs, scale: float, shift: float,
                    backend: str | None = None):
    """Σ_k coeffs[k]·T_k((H − shift)/scale)·psi for a CSR matrix H."""
    b = backend or BACKEND
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    if b == "numba":
        return _cheb_nb(indptr, indices, data, psi, coeffs, float(scale), float(shift))
    return _cheb_np(indptr, indices, data, psi, coeffs, float(scale), float(shift))


__all__ = ["BACKEND", "configure_threads", "matvec", "chebyshev_apply"]
