"""Continuum integrals of the form factor and their continuation.

F(u) = ∫₀^c v²(ω)/(u − ω) dω      G(u) = ∫₀^c v²(ω)/(u + ω) dω

Both are evaluated "from above": for Im u > 0 they are the plain integrals,
for real u the +i0 boundary value, and for Im u < 0 the analytic
continuation across the cut. Off the cut the continuation adds
−2πi·v²(u) (F, for 0 < Re u < c) or −2πi·v²(−u) (G, for −c < Re u < 0)
to the physical-sheet value, with v² extended by its closed-form rule.
"""

from __future__ import annotations

import cmath
import math
import warnings
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import ConvergenceError
from .model import FormFactor, ModelSpec, QuadratureSpec, eval_v2, v2_holo

TWO_PI_I = 2j * math.pi


def _quad(func, a, b, q: QuadratureSpec, what: str, **kw):
    """Adaptive quadrature; turns IntegrationWarning into ConvergenceError."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(func, a, b, limit=q.limit, epsabs=q.epsabs, epsrel=q.epsrel, **kw)
        except IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IntegrationWarning)
                val, err = quad(func, a, b, limit=q.limit, epsabs=q.epsabs, epsrel=q.epsrel, **kw)
            # complex integrands report the error as a complex number (or a pair)
            err = abs(complex(*err)) if isinstance(err, tuple) else abs(err)
            # accept the result if the estimate is still tiny in absolute terms
            if err > max(1e3 * q.epsabs, 1e-9 * abs(val)):
                raise ConvergenceError(f"quadrature for {what} did not converge: {exc}",
                                       estimate=err) from exc
    return val


@lru_cache(maxsize=200_000)
def _f_upper(ff: FormFactor, q: QuadratureSpec, u: complex) -> complex:
    """F(u) for Im u >= 0 (Im u == 0 means the +i0 boundary value)."""
    if ff.g2 == 0.0:
        return 0j
    c = q.omega_cut
    x, y = u.real, u.imag
    if y == 0.0:
        u = complex(x, 0.0)  # normalise a signed zero so the logs land on the upper side
    g = ff.g2
    Om = ff.cutoff_Omega
    near = y < 1.0 and -1.0 < x < c + 1.0
    if not near:
        val = _quad(lambda w: g * w * math.exp(-w / Om) / (u - w), 0.0, c, q,
                    f"F({u})", complex_func=True)
        return complex(val)
    vu = complex(v2_holo(ff, u))

    def sub(w):
        return (g * w * math.exp(-w / Om) - vu) / (u - w)

    pts = [x] if 0.0 < x < c else None
    val = complex(_quad(sub, 0.0, c, q, f"F({u})", complex_func=True, points=pts))
    if vu != 0:
        val += vu * (cmath.log(u) - cmath.log(complex(x - c, u.imag)))
    return val


def F(spec: ModelSpec, u: complex) -> complex:
    """∫ v²(ω)/(u−ω) dω continued from the upper half-plane."""
    ff, q = spec.form_factor, spec.quadrature
    u = complex(u)
    if u.imag >= 0:
        return _f_upper(ff, q, u)
    val = _f_upper(ff, q, u.conjugate()).conjugate()
    if 0.0 < u.real < q.omega_cut:
        val -= TWO_PI_I * complex(v2_holo(ff, u))
    return val


def G(spec: ModelSpec, u: complex) -> complex:
    """∫ v²(ω)/(u+ω) dω continued from the upper half-plane."""
    ff, q = spec.form_factor, spec.quadrature
    u = complex(u)
    if u.imag >= 0:
        return -_f_upper(ff, q, complex(-u.real, u.imag)).conjugate()
    val = -_f_upper(ff, q, -u)
    if -q.omega_cut < u.real < 0.0:
        val -= TWO_PI_I * complex(v2_holo(ff, -u))
    return val


def F_physical(spec: ModelSpec, u: complex) -> complex:
    """Physical-sheet value (no continuation) at any u off the cut."""
    u = complex(u)
    if u.imag >= 0:
        return _f_upper(spec.form_factor, spec.quadrature, u)
    return _f_upper(spec.form_factor, spec.quadrature, u.conjugate()).conjugate()


def F_below(spec: ModelSpec, x: float) -> complex:
    """Boundary value F(x − i0) on the physical sheet."""
    return F_physical(spec, complex(x, 0.0)).conjugate()


def integrate(spec: ModelSpec, func, what: str = "integral", **kw) -> float:
    """∫₀^c func(ω) dω with the configured quadrature controls."""
    return _quad(func, 0.0, spec.quadrature.omega_cut, spec.quadrature, what, **kw)


def inverse_square_moment(spec: ModelSpec, shift: float) -> float:
    """∫ v²(ω)/(shift+ω)² dω, the integral that governs the fourth-order terms."""
    ff = spec.form_factor
    return integrate(spec, lambda w: eval_v2(ff, w) / (shift + w) ** 2, "∫v²/(Δ+ω)²")


def richardson_limit(fn, x: float, eps_seq) -> complex:
    """Extrapolate fn(x + iε) to ε → 0 by Neville's scheme on the given offsets."""
    eps = np.asarray(sorted(eps_seq, reverse=True), dtype=float)
    vals = [complex(fn(complex(x, e))) for e in eps]
    tab = list(vals)
    n = len(eps)
    for m in range(1, n):
        for i in range(n - m):
            tab[i] = (eps[i] * tab[i + 1] - eps[i + m] * tab[i]) / (eps[i] - eps[i + m])
    return tab[0]


def clear_cache() -> None:
    _f_upper.cache_clear()
