"""Irreducible operators ψ, T and W for the atomic sectors.

Second-order elements come from an explicit enumeration of two-vertex
paths of the Liouvillian. A vertex acting on the ket carries +V, one on
the bra carries −V. The connecting vertex of the reduced formalism moves
a photon line across and flips the atom on the other side, with the sign
of the side it acts on. Paths through a connecting vertex make up T, the
others make up ψ.

The fourth-order W00.00(0) is built from its sixteen hand-listed paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import continuum
from .continuum import F, G
from .errors import ConsistencyError, ContractViolation
from .model import ModelSpec, eval_v2

DIAG = ("11", "00")
DIPOLE = ("10", "01")


@dataclass(frozen=True)
class IrreducibleElement:
    operator: str
    row: str
    col: str
    order: int
    z: complex
    value: complex


# --- two-vertex enumeration ----------------------------------------------

def _energy_offset(spec: ModelSpec, ket: int, bra: int) -> float:
    om = (spec.omega0, spec.omega1)
    return om[ket] - om[bra]


def _paths2(spec: ModelSpec, start: str, z: complex):
    """Yield (end, kind, value) for every second-order path leaving vacuum state ``start``."""
    a, b = int(start[0]), int(start[1])
    # first vertex on the ket: photon on the ket side, intermediate energy e0 + k
    e0 = _energy_offset(spec, 1 - a, b)
    prop = F(spec, z - e0)
    yield f"{a}{b}", "psi", prop                # ket absorbs it again (+)(+)
    yield f"{1 - a}{1 - b}", "T", -prop         # connecting vertex flips the bra (+)(−)
    # first vertex on the bra: photon on the bra side, intermediate energy e0 − k
    e0 = _energy_offset(spec, a, 1 - b)
    prop = G(spec, z - e0)
    yield f"{a}{b}", "psi", prop                # (−)(−)
    yield f"{1 - a}{1 - b}", "T", -prop         # (−)(+)


def _element2(spec: ModelSpec, operator: str, row: str, col: str, z: complex) -> complex:
    val = 0j
    for end, kind, v in _paths2(spec, col, complex(z)):
        if end != row:
            continue
        if operator == "W" or operator == kind:
            val += v
    return val


def _check(element: str, allowed) -> tuple:
    try:
        row, col = element.split(".")
    except ValueError:
        raise ContractViolation(f"malformed element {element!r}") from None
    if row not in allowed or col not in allowed:
        raise ContractViolation(f"element {element!r} is outside the sector {allowed}")
    return row, col


def eval_W2_diag(spec: ModelSpec, element: str, z: complex) -> complex:
    row, col = _check(element, DIAG)
    return _element2(spec, "W", row, col, z)


def eval_psi2_diag(spec: ModelSpec, element: str, z: complex) -> complex:
    row, col = _check(element, DIAG)
    return _element2(spec, "psi", row, col, z)


def eval_T2_diag(spec: ModelSpec, element: str, z: complex) -> complex:
    row, col = _check(element, DIAG)
    return _element2(spec, "T", row, col, z)


def eval_W_dipolar(spec: ModelSpec, element: str, z: complex, order: int = 2) -> complex:
    if order != 2:
        raise ContractViolation("dipolar W is implemented at second order only")
    row, col = _check(element, DIPOLE)
    return _element2(spec, "W", row, col, z)


def eval_psi_dipolar(spec: ModelSpec, element: str, z: complex) -> complex:
    row, col = _check(element, DIPOLE)
    return _element2(spec, "psi", row, col, z)


def eval_T_dipolar(spec: ModelSpec, element: str, z: complex) -> complex:
    row, col = _check(element, DIPOLE)
    return _element2(spec, "T", row, col, z)


def W_matrix(spec: ModelSpec, basis, z: complex) -> np.ndarray:
    z = complex(z)
    W = np.zeros((2, 2), dtype=complex)
    for j, col in enumerate(basis):
        for end, _, v in _paths2(spec, col, z):
            if end in basis:
                W[basis.index(end), j] += v
    return W


def diag_trace(spec: ModelSpec, z: complex) -> complex:
    """W11.11(z) + W00.00(z) at second order; θ̄ is the root of z = diag_trace(z)."""
    W = W_matrix(spec, DIAG, z)
    return W[0, 0] + W[1, 1]


def reduced_resolvent_diag(spec: ModelSpec, z: complex) -> np.ndarray:
    return np.linalg.inv(complex(z) * np.eye(2) - W_matrix(spec, DIAG, z))


def dipolar_generator(spec: ModelSpec, z: complex) -> np.ndarray:
    """Free part diag(Δ, −Δ) plus the dipolar W(z), basis [10, 01]."""
    return np.diag([spec.gap, -spec.gap]).astype(complex) + W_matrix(spec, DIPOLE, z)


def reduced_resolvent_dipolar(spec: ModelSpec, z: complex) -> np.ndarray:
    return np.linalg.inv(complex(z) * np.eye(2) - dipolar_generator(spec, z))


def dipolar_numerator(spec: ModelSpec, z: complex) -> np.ndarray:
    """Adjugate of (z − L_eff): the resolvent is this matrix divided by D(z)."""
    M = complex(z) * np.eye(2) - dipolar_generator(spec, z)
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])


def dipolar_denominator(spec: ModelSpec, z: complex) -> complex:
    z = complex(z)
    D = spec.gap
    w1010 = eval_W_dipolar(spec, "10.10", z)
    w0101 = eval_W_dipolar(spec, "01.01", z)
    return z * z - z * (w1010 + w0101) - D * D + D * (w0101 - w1010)


def sum_rule_residuals(spec: ModelSpec, z: complex) -> dict:
    """W11.cd + W00.cd and W10.cd + W01.cd for every column, plus the T identities."""
    out = {}
    Wd = W_matrix(spec, DIAG, z)
    Wo = W_matrix(spec, DIPOLE, z)
    for j, col in enumerate(DIAG):
        out[f"W11.{col}+W00.{col}"] = abs(Wd[0, j] + Wd[1, j])
    for j, col in enumerate(DIPOLE):
        out[f"W10.{col}+W01.{col}"] = abs(Wo[0, j] + Wo[1, j])
    out["T11.00+W00.00"] = abs(eval_T2_diag(spec, "11.00", z) + Wd[1, 1])
    out["T00.11+W11.11"] = abs(eval_T2_diag(spec, "00.11", z) + Wd[0, 0])
    for op in ("11.11", "00.00", "11.00", "00.11"):
        w = eval_W2_diag(spec, op, z)
        out[f"W-psi-T {op}"] = abs(w - eval_psi2_diag(spec, op, z) - eval_T2_diag(spec, op, z))
    out["psi11.00"] = abs(eval_psi2_diag(spec, "11.00", z))
    out["psi00.11"] = abs(eval_psi2_diag(spec, "00.11", z))
    return out


# --- one-photon vertices -------------------------------------------------

def _parse_photon(label: str):
    """'0λ1' -> ('ket', 0, 1); '10λ' -> ('bra', 1, 0)."""
    s = label.replace("λ", "l")
    if len(s) == 3 and s[1] == "l":
        return "ket", int(s[0]), int(s[2])
    if len(s) == 3 and s[2] == "l":
        return "bra", int(s[0]), int(s[1])
    raise ContractViolation(f"not a one-photon state label: {label!r}")


def eval_W_one_photon(spec: ModelSpec, element: str, omega_lambda: float) -> complex:
    """First-order vertex from a one-photon state to a vacuum state, e.g. '11.0λ1'."""
    try:
        row, col = element.split(".")
        a, b = int(row[0]), int(row[1])
        if len(row) != 2:
            raise ValueError
    except ValueError:
        raise ContractViolation(f"malformed one-photon element {element!r}") from None
    side, c, d = _parse_photon(col)
    V = math.sqrt(eval_v2(spec.form_factor, omega_lambda))
    if side == "ket":
        if (a, b) == (1 - c, d):
            return complex(V)       # ket absorbs the line
        if (a, b) == (c, 1 - d):
            return complex(-V)      # connecting vertex, flips the bra
    else:
        if (a, b) == (c, 1 - d):
            return complex(-V)      # bra absorbs the line
        if (a, b) == (1 - c, d):
            return complex(V)       # connecting vertex, flips the ket
    raise ContractViolation(f"{element!r} is not a one-vertex absorbing transition")


def one_photon_block(spec: ModelSpec, omega_lambda: float, side: str) -> np.ndarray:
    """Rows [11, 00]; columns [1λ0, 0λ1] (ket) or [10λ, 01λ] (bra)."""
    cols = ("1λ0", "0λ1") if side == "ket" else ("10λ", "01λ")
    return np.array([[eval_W_one_photon(spec, f"{r}.{c}", omega_lambda) for c in cols]
                     for r in DIAG])


# --- fourth order, W00.00 at z = 0 ----------------------------------------

def _I_contribution(spec: ModelSpec, name: str, tau: int) -> complex:
    """∫∫ v²(k)v²(k′) Π 1/(E_i − iτ0) for one listed path.

    Inner k′ integrals are reduced to boundary values of F and G by partial
    fractions; resonant outer denominators k − Δ are split into a principal
    value (Cauchy-weight quadrature) and an iπτ·δ term.
    """
    D = spec.gap
    ff = spec.form_factor
    c = spec.quadrature.omega_cut

    def v2(w):
        return eval_v2(ff, w)

    def Fside(x):
        # ∫ v²(k′)/(x − k′ − iτ0)
        return continuum.F_below(spec, x) if tau > 0 else continuum.F(spec, complex(x, 0.0))

    Gd = G(spec, complex(D, 0.0)).real            # ∫ v²/(Δ + k′), no singularity

    def Gk(k):
        return G(spec, complex(k, 0.0)).real      # ∫ v²/(k + k′)

    def h(k):
        # ∫ v²(k′)/((k + k′)(Δ + k′))
        return continuum.integrate(spec, lambda w: v2(w) / ((k + w) * (D + w)), "C2 inner")

    # inner(k): everything except v²(k) and the first propagator
    if name == "C1":
        inner = lambda k: Gk(k) / (D + k)
    elif name == "C2":
        inner = lambda k: h(k)
    elif name == "C3":
        inner = lambda k: Fside(k) / (D + k)
    elif name == "C4":
        inner = lambda k: -(Fside(k) + Gd) / (D + k)
    elif name == "C5":
        inner = lambda k: Gk(k) / (D + k)
    elif name == "C6":
        inner = lambda k: h(k)
    elif name == "C7":
        inner = lambda k: Fside(k) / (D + k)
    elif name == "C8":
        inner = lambda k: -(Fside(k) + Gd) / (D + k)
    else:
        raise ContractViolation(name)

    if name in ("C1", "C2", "C3", "C4"):
        # first propagator 1/(Δ + k) never vanishes
        f = lambda k: v2(k) * inner(k) / (D + k)
        return complex(continuum.integrate(spec, f, name, complex_func=True))

    # first propagator 1/(k − Δ − iτ0): principal value plus iπτ·(residue at k = Δ)
    g = lambda k: complex(v2(k) * inner(k))
    m = 0.5 * (D + c)
    q = spec.quadrature
    re = continuum._quad(lambda k: g(k).real, 0.0, m, q, f"{name} PV", weight="cauchy", wvar=D)
    im = continuum._quad(lambda k: g(k).imag, 0.0, m, q, f"{name} PV", weight="cauchy", wvar=D)
    tail = continuum._quad(lambda k: g(k) / (k - D), m, c, q, f"{name} tail", complex_func=True)
    return complex(re, im) + tail + 1j * math.pi * tau * g(D)


W4_REFERENCE_G2 = 1e-3


@dataclass
class AppendixB:
    contributions: dict          # name -> complex value at z = +i0
    pairs: dict                  # pair label -> value
    references: dict             # closed-form reference values
    residuals: dict              # check label -> relative residual
    total: complex
    reference_total: complex


def eval_W4_0000_at0(spec: ModelSpec, tol: float = 1e-8, strict: bool = True) -> AppendixB:
    """All sixteen fourth-order paths from 00 to 00 at z → +i0.

    C_j(z) = ∫∫ Π 1/(z − E_i) and the primed paths flip the sign of every
    energy. At z = +i0 this gives C_j = −I_j(+) and C_j′ = +I_j(−).
    """
    D = spec.gap
    g2 = spec.form_factor.g2
    # every path is exactly ∝ g⁴: evaluate at the coupling the absolute
    # quadrature tolerances are tuned for, then rescale
    unit = spec.with_coupling(W4_REFERENCE_G2) if g2 != 0 else spec
    scale = (g2 / W4_REFERENCE_G2) ** 2
    ff = unit.form_factor
    vD = eval_v2(ff, D)
    C = {}
    for name in ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8"):
        C[name] = -scale * _I_contribution(unit, name, +1)
        C[name + "'"] = scale * _I_contribution(unit, name, -1)

    J = continuum.inverse_square_moment(unit, D)
    Gd = G(unit, complex(D, 0.0)).real
    firstmom = continuum.integrate(unit, lambda w: eval_v2(ff, w) / (D + w), "∫v²/(Δ+ω)")
    refs = {
        "C34 closed form": scale * Gd * J,
        "C56+C5'6' closed form": -2j * math.pi * scale * vD * (firstmom / (2 * D) + J),
        "C78+C7'8' closed form": -2j * math.pi * scale * vD * (-1 / (2 * D)) * firstmom,
        "total closed form": -2j * math.pi * scale * vD * J,
    }
    pairs = {
        "C1+C1'": C["C1"] + C["C1'"],
        "C2+C2'": C["C2"] + C["C2'"],
        "C34": C["C3"] + C["C4"],
        "C34+C3'4'": C["C3"] + C["C4"] + C["C3'"] + C["C4'"],
        "C56+C5'6'": C["C5"] + C["C6"] + C["C5'"] + C["C6'"],
        "C78+C7'8'": C["C7"] + C["C8"] + C["C7'"] + C["C8'"],
    }
    total = 0j
    for name in sorted(C):          # fixed summation order
        total += C[name]

    def rel(a, scale):
        return abs(a) / abs(scale) if scale != 0 else abs(a)

    res = {
        "C1+C1'": rel(pairs["C1+C1'"], C["C1"]),
        "C2+C2'": rel(pairs["C2+C2'"], C["C2"]),
        "C34+C3'4'": rel(pairs["C34+C3'4'"], C["C3"]),
        "C34 vs closed form": rel(pairs["C34"] - refs["C34 closed form"], refs["C34 closed form"]),
        "C56 vs closed form": rel(pairs["C56+C5'6'"] - refs["C56+C5'6' closed form"],
                           refs["C56+C5'6' closed form"]),
        "C78 vs closed form": rel(pairs["C78+C7'8'"] - refs["C78+C7'8' closed form"],
                           refs["C78+C7'8' closed form"]),
        "total vs closed form": rel(total - refs["total closed form"], refs["total closed form"]),
    }
    if g2 == 0:
        res = {k: 0.0 for k in res}
    if strict:
        bad = [k for k, v in res.items() if not v < tol]
        if bad:
            raise ConsistencyError(f"fourth-order cancellation failed for {bad}")
    return AppendixB(C, pairs, refs, res, total, refs["total closed form"])


def W00_at0(spec: ModelSpec, include_order4: bool | None = None) -> complex:
    """W00.00(0): zero at second order, so the fourth order carries it."""
    inc = spec.include_order4 if include_order4 is None else include_order4
    w2 = eval_W2_diag(spec, "00.00", 0.0)
    if not inc or spec.form_factor.g2 == 0:
        return w2
    return w2 + eval_W4_0000_at0(spec).total


__all__ = [
    "IrreducibleElement", "eval_W2_diag", "eval_psi2_diag", "eval_T2_diag", "eval_W_dipolar",
    "eval_psi_dipolar", "eval_T_dipolar", "W_matrix", "diag_trace", "reduced_resolvent_diag",
    "reduced_resolvent_dipolar", "dipolar_numerator", "dipolar_denominator",
    "dipolar_generator", "sum_rule_residuals", "eval_W_one_photon", "one_photon_block",
    "eval_W4_0000_at0", "AppendixB", "W00_at0",
]
