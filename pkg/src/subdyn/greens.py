"""Self-energies, atomic Green's functions and the physical poles.

f1(z) = ∫ v²(ω)/(z − ω0 − ω),  f0(z) = ∫ v²(ω)/(z − ω1 − ω)
1/η_l(z) = 1/(z − ω_l − f_l(z))

Values below the real axis are continuations from above (see continuum.py).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import continuum
from .errors import ConsistencyError, ContractViolation, ConvergenceError, NearPoleError
from .model import ModelSpec, eval_v2

KINDS = ("excited", "ground", "bar_excited", "bar_ground")


@dataclass(frozen=True)
class SheetedValue:
    value: complex
    continued: bool


@dataclass(frozen=True)
class PoleData:
    kind: str
    location: complex
    residue: complex
    solver_residual: float
    iterations: int = 0


@dataclass(frozen=True)
class LiouvillePoles:
    theta_bar: complex
    delta10: complex
    delta01: complex
    A1sq: complex
    A10: complex
    A01: complex
    theta_bar_sum: complex = 0j
    delta10_sum: complex = 0j
    delta01_sum: complex = 0j
    R1111_residue: complex = 0j
    residuals: dict = field(default_factory=dict)


def _level_shift(spec: ModelSpec, level: int) -> float:
    if level == 1:
        return spec.omega0
    if level == 0:
        return spec.omega1
    raise ContractViolation(f"level must be 0 or 1, got {level!r}")


def _f(spec: ModelSpec, level: int, z: complex) -> complex:
    return continuum.F(spec, complex(z) - _level_shift(spec, level))


def eval_f(spec: ModelSpec, level: int, z: complex, order: int = 2) -> SheetedValue:
    """Second-order self-energy of the given level."""
    if order != 2:
        raise ContractViolation("only the second-order self-energy is implemented")
    z = complex(z)
    u = z - _level_shift(spec, level)
    if u == 0 and spec.form_factor.g2 != 0:
        raise ContractViolation("z sits on the branch point")
    return SheetedValue(_f(spec, level, z), z.imag <= 0)


def eval_eta_inv(spec: ModelSpec, level: int, z: complex) -> SheetedValue:
    z = complex(z)
    omega = spec.omega1 if level == 1 else spec.omega0
    f = eval_f(spec, level, z)
    eta = z - omega - f.value
    if abs(eta) < 1e-14:
        raise NearPoleError(f"|η_{level}({z})| = {abs(eta):.3e} is below 1e-14")
    return SheetedValue(1.0 / eta, f.continued)


def _step(spec: ModelSpec, z: complex) -> float:
    return 1e-7 * max(1.0, abs(z))


def derivative(fn, z: complex, h: float) -> complex:
    """Central difference along the real direction."""
    return (fn(z + h) - fn(z - h)) / (2 * h)


def residue(fn, p: complex, r: float) -> complex:
    """lim (z−p)·fn(z), averaged over four points on a circle of radius r.

    The average cancels the first three Laurent corrections, so the error is O(r⁴).
    """
    acc = 0j
    for k in range(4):
        d = r * complex(math.cos(k * math.pi / 2), math.sin(k * math.pi / 2))
        acc += d * fn(p + d)
    return acc / 4


def _newton(fn, z0: complex, spec: ModelSpec, what: str, real: bool = False):
    sol = spec.pole_solver
    z = complex(z0)
    g = fn(z)
    for it in range(1, sol.maxiter + 1):
        h = _step(spec, z)
        dg = derivative(fn, z, h)
        if dg == 0:
            raise ConvergenceError(f"{what}: zero derivative", last=z)
        dz = -g / dg
        if real:
            dz = complex(dz.real, 0.0)
        z = z + (sol.damping if it == 1 else 1.0) * dz
        g = fn(z)
        if abs(g) < sol.tol and abs(dz) < 1e3 * sol.tol * max(1.0, abs(z)):
            return z, abs(g), it
    raise ConvergenceError(f"{what}: no convergence after {sol.maxiter} iterations "
                           f"(|g| = {abs(g):.3e})", estimate=abs(g), last=z)


def find_pole(spec: ModelSpec, level: int) -> PoleData:
    """Pole of 1/η_level, continued below the real axis for the excited level."""
    ff = spec.form_factor
    if level == 1:
        def g(z):
            return z - spec.omega1 - _f(spec, 1, z)

        z0 = complex(spec.omega1, -math.pi * eval_v2(ff, spec.gap))
        z, res, it = (complex(spec.omega1), 0.0, 0) if ff.g2 == 0 else _newton(g, z0, spec, "excited pole")
        h = _step(spec, z)
        dfz = derivative(lambda w: _f(spec, 1, w), z, h)
        return PoleData("excited", z, 1.0 / (1.0 - dfz), res, it)
    if level == 0:
        def g(z):
            return z - spec.omega0 - _f(spec, 0, complex(z.real, 0.0))

        z0 = complex(spec.omega0 + _f(spec, 0, spec.omega0).real, 0.0)
        z, res, it = (complex(spec.omega0), 0.0, 0) if ff.g2 == 0 else _newton(g, z0, spec, "ground pole", real=True)
        if not z.real < spec.omega1:
            raise ConvergenceError("ground pole left the region below ω1", last=z)
        h = _step(spec, z)
        dfz = derivative(lambda w: _f(spec, 0, complex(w.real, 0.0)), z, h)
        return PoleData("ground", complex(z.real, 0.0), 1.0 / (1.0 - dfz.real), res, it)
    raise ContractViolation(f"level must be 0 or 1, got {level!r}")


def bar_pole(p: PoleData) -> PoleData:
    if p.kind == "excited":
        return PoleData("bar_excited", -p.location.conjugate(), p.residue.conjugate(),
                        p.solver_residual, p.iterations)
    if p.kind == "ground":
        return PoleData("bar_ground", -p.location, p.residue.conjugate(),
                        p.solver_residual, p.iterations)
    raise ContractViolation(f"bar_pole needs an excited or ground pole, got {p.kind!r}")


def compose_liouville_poles(spec: ModelSpec, excited: PoleData, ground: PoleData,
                            bar_excited: PoleData, bar_ground: PoleData) -> LiouvillePoles:
    """Liouvillian poles and residues.

    The first-guess sums (θ̄ = ζ+ζ̄ and so on) are refined to the exact roots
    of the second-order sector denominators, so that the sector identities
    hold to rounding. The sums are kept alongside for reference.
    """
    from . import collision

    for p, k in ((excited, "excited"), (ground, "ground"), (bar_excited, "bar_excited"),
                 (bar_ground, "bar_ground")):
        if p.kind != k:
            raise ContractViolation(f"expected a {k} pole, got {p.kind!r}")
    theta_sum = excited.location + bar_excited.location
    d10_sum = excited.location - spec.omega0 + (bar_ground.location + spec.omega0)
    d01_sum = ground.location + bar_excited.location
    if spec.form_factor.g2 == 0:
        Delta = spec.gap
        return LiouvillePoles(0j, complex(Delta), complex(-Delta), 1 + 0j,
                              complex(1 / (2 * Delta)), complex(-1 / (2 * Delta)),
                              theta_sum, d10_sum, d01_sum, 1 + 0j,
                              {"theta_bar_real": 0.0, "delta_mirror": 0.0})

    # θ̄ solves z = W11.11(z) + W00.00(z); on the imaginary axis both sides are imaginary
    def h(y):
        return y - collision.diag_trace(spec, complex(0.0, y)).imag

    y = theta_sum.imag
    sol = spec.pole_solver
    for _ in range(sol.maxiter):
        step = 1e-7 * max(1.0, abs(y))
        dy = -h(y) / ((h(y + step) - h(y - step)) / (2 * step))
        y += dy
        if abs(dy) < 1e-15 + 1e-13 * abs(y):
            break
    else:
        raise ConvergenceError("θ̄ root search did not converge", last=y)
    theta = complex(0.0, y)
    theta_resid = abs(theta - collision.diag_trace(spec, theta))

    d10, d_resid, _ = _newton(lambda z: collision.dipolar_denominator(spec, z), d10_sum, spec,
                              "δ10 root")
    d01 = -d10.conjugate()

    r_theta = 1e-3 * abs(theta)
    A1sq = residue(lambda z: 1.0 / (z - collision.diag_trace(spec, z)), theta, r_theta)
    R1111 = residue(lambda z: collision.reduced_resolvent_diag(spec, z)[0, 0], theta, r_theta)
    A10 = residue(lambda z: 1.0 / collision.dipolar_denominator(spec, z), d10, 1e-3)
    A01 = residue(lambda z: 1.0 / collision.dipolar_denominator(spec, z), d01, 1e-3)

    resid = {
        "theta_bar_real": abs(theta.real),
        "theta_bar_equation": theta_resid,
        "delta10_equation": d_resid,
        "delta01_equation": abs(collision.dipolar_denominator(spec, d01)),
        "delta_mirror": abs(d01 + d10.conjugate()),
        "A01_mirror": abs(A01 + A10.conjugate()),
    }
    if abs(theta.real) > 1e-10 * abs(theta.imag) + 1e-14:
        raise ConsistencyError(f"θ̄ = {theta} is not purely imaginary")
    return LiouvillePoles(theta, d10, d01, A1sq, A10, A01, theta_sum, d10_sum, d01_sum,
                          R1111, resid)


def liouville_poles(spec: ModelSpec) -> LiouvillePoles:
    """Convenience: find the atomic poles and compose them."""
    ex = find_pole(spec, 1)
    gr = find_pole(spec, 0)
    return compose_liouville_poles(spec, ex, gr, bar_pole(ex), bar_pole(gr))


def golden_rule_width(spec: ModelSpec) -> float:
    return 2 * math.pi * eval_v2(spec.form_factor, spec.gap)


__all__ = [
    "SheetedValue", "PoleData", "LiouvillePoles", "eval_f", "eval_eta_inv", "find_pole",
    "bar_pole", "compose_liouville_poles", "liouville_poles", "residue", "golden_rule_width",
    "derivative",
]
