"""Dressing χ and physical generator Φ = χ⁻¹Θχ, plus the first-order dressed vertex."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, SingularError, SubdynError
from .model import eval_v2, v2_prime
from .subdyn import DIAG, DIPOLE, Kinetics, SectorBlock, _inv2

NORMALIZATION = "|chi|^2 = |A_D| (x^2 - y^2 = sqrt|A_D|), phi = 0"


class ParametrizationError(SubdynError):
    """The dipolar relations force y² < 0."""

    exit_code = 3

    def __init__(self, message: str, combination=None):
        super().__init__(message)
        self.combination = combination


@dataclass(eq=False)
class DressingSet:
    sector: str
    chi: SectorBlock
    chi_inv: SectorBlock
    phi: SectorBlock
    free_param: dict = field(default_factory=dict)

    def invariant_residuals(self) -> dict:
        c, ci = self.chi.matrix, self.chi_inv.matrix
        out = {"chi_chi_inv": float(np.max(np.abs(c @ ci - np.eye(2))))}
        if self.sector == "diag":
            out["trace_chi"] = float(abs(c[0, 0] + c[1, 0] - 1))
            out["trace_chi_inv"] = float(abs(ci[0, 0] + ci[1, 0] - 1))
        else:
            out["hermiticity"] = float(max(abs(c[0, 0] - c[1, 1].conjugate()),
                                           abs(c[1, 0] - c[0, 1].conjugate())))
        return out


def build_chi_diag(kin: Kinetics) -> DressingSet:
    """Closed-form diagonal dressing; it reduces to the identity without coupling."""
    th = kin.poles.theta_bar
    if kin.free:
        r11, r00 = 1.0 + 0j, 0j
    else:
        w11, w00 = kin.W0
        if abs(w11 - w00) <= 1e-14:
            raise SingularError(f"W11.11(0) − W00.00(0) = {w11 - w00:.3e}: dressing is singular")
        S = w11 + w00
        r11, r00 = w11 / S, w00 / S
    chi = np.array([[r11, r00], [r00, r11]], dtype=complex)
    det = r11 - r00           # (W11 − W00)/(W11 + W00)
    chi_inv = np.array([[r11, -r00], [-r00, r11]], dtype=complex) / (r11 * r11 - r00 * r00)
    phi = np.array([[th, 0], [-th, 0]], dtype=complex)
    return DressingSet("diag", SectorBlock("diag", DIAG, chi, "chi"),
                       SectorBlock("diag", DIAG, chi_inv, "chi_inv"),
                       SectorBlock("diag", DIAG, phi, "Phi"),
                       {"determinant": det, "phase_convention": "closed form, no free parameter"})


def dipolar_relations(kin: Kinetics) -> dict:
    """Right-hand sides of the four χ relations divided by |χ|."""
    a, b = kin.dipole_parts
    det = kin.det_A_dipolar()
    return {
        "K1": (a[0, 0] * b[1, 1] - a[0, 1] * b[1, 0]) / det,
        "K2": (a[1, 0] * b[1, 1] - a[1, 1] * b[1, 0]) / det,
        "K3": -(-a[0, 0] * b[0, 1] + a[0, 1] * b[0, 0]) / det,
        "K4": -(-a[1, 0] * b[0, 1] + a[1, 1] * b[0, 0]) / det,
        "det": det,
    }


def build_chi_dipolar(kin: Kinetics, x="auto") -> DressingSet:
    """Parametrized dipolar dressing with φ = 0.

    ``x="auto"`` fixes the scale by |χ|² = |Ã_D|; a positive number overrides it
    and y follows from the first relation.
    """
    p = kin.poles
    rel = dipolar_relations(kin)
    K1, K2, K4 = rel["K1"], rel["K2"], rel["K4"]
    if x == "auto":
        N = cmath.sqrt(rel["det"])
        x2 = N * K1
        y2 = N * K4
    else:
        if not (isinstance(x, (int, float)) and x > 0):
            raise ContractViolation("x must be 'auto' or a positive number")
        x2 = complex(x) ** 2
        N = x2 / K1
        y2 = N * K4
    imag_resid = max(abs(x2.imag), abs(y2.imag))
    if y2.real < -1e-15:
        raise ParametrizationError(
            f"y² = {y2.real:.3e} < 0 from α01.01β10.10 − α01.10β10.01 = {K4 * rel['det']:.3e}",
            combination=K4 * rel["det"])
    xv, yv = math.sqrt(x2.real), math.sqrt(max(y2.real, 0.0))
    psi = -cmath.phase(N * K2) if yv > 0 else 0.0
    chi = np.array([[xv, yv * cmath.exp(1j * psi)], [yv * cmath.exp(-1j * psi), xv]], dtype=complex)
    chi_inv = _inv2(chi, "dipolar χ")
    phi = np.diag([p.delta10, p.delta01]).astype(complex)
    free = {"x": xv, "y": yv, "psi": psi, "phi": 0.0,
            "phase_convention": NORMALIZATION if x == "auto" else f"x fixed to {x}, phi = 0",
            "imaginary_residue": imag_resid}
    return DressingSet("dipole", SectorBlock("dipole", DIPOLE, chi, "chi"),
                       SectorBlock("dipole", DIPOLE, chi_inv, "chi_inv"),
                       SectorBlock("dipole", DIPOLE, phi, "Phi"), free)


def eigenvector_ratios(theta: SectorBlock, targets) -> list:
    """Second/first component ratio of the Θ eigenvector nearest each target eigenvalue."""
    w, V = np.linalg.eig(theta.matrix)
    out = []
    for t in targets:
        k = int(np.argmin(np.abs(w - t)))
        out.append(V[1, k] / V[0, k])
    return out


def verify_similarity(theta: SectorBlock, dressing: DressingSet) -> dict:
    if theta.sector != dressing.sector:
        raise ContractViolation(f"sector mismatch: {theta.sector} vs {dressing.sector}")
    c, ci, ph = dressing.chi.matrix, dressing.chi_inv.matrix, dressing.phi.matrix
    th = theta.matrix
    return {
        "chi_phi_chi_inv_minus_theta": float(np.max(np.abs(c @ ph @ ci - th))),
        "chi_inv_theta_chi_minus_phi": float(np.max(np.abs(ci @ th @ c - ph))),
    }


def physical_evolution_diag(dressing: DressingSet, t: float) -> np.ndarray:
    """exp(−iΦt) applied to the pure excited state (1, 0)."""
    th = dressing.phi.matrix[0, 0]
    e = cmath.exp(-1j * th * t)
    return np.array([e, 1 - e])


# --- dressed vertex ------------------------------------------------------

def _phase(omega_lambda: float, r, k_hat) -> complex:
    k = omega_lambda * np.asarray(k_hat, dtype=float)
    return cmath.exp(1j * float(np.dot(k, np.asarray(r, dtype=float))))


def build_X_and_phi_vertex(spec, omega_lambda: float, target: str = "bare", r=(0.0, 0.0, 0.0),
                           k_hat=(0.0, 0.0, 1.0), phi_abs: float | None = None) -> dict:
    """First-order X and Φ vertex for the absorption element 11.0λ1.

    ``target="bare"`` keeps the bare vertex; ``target="causal"`` chooses X so
    that Φ takes the local form φ·e^{ik·r}/√ω. X stays finite at resonance.
    """
    wl = float(omega_lambda)
    if not wl > 0:
        raise ContractViolation("omega_lambda must be positive")
    ff = spec.form_factor
    D = spec.gap
    v2 = eval_v2(ff, wl)
    V = math.sqrt(v2)
    ph = _phase(wl, r, k_hat)
    detuning = spec.omega0 + wl - spec.omega1
    if target == "bare":
        return {"target": "bare", "omega_lambda": wl, "X": {"11.0λ1": 0j},
                "Phi": {"11.0λ1": complex(V * ph)}, "V": complex(V * ph)}
    if target != "causal":
        raise ContractViolation("target must be 'bare' or 'causal'")
    vD = math.sqrt(eval_v2(ff, D))
    phi_res = vD * math.sqrt(D)
    if phi_abs is None:
        phi_abs = phi_res
    if abs(phi_abs - phi_res) > 1e-12 * max(1.0, phi_res):
        raise SingularError("causal target does not match the bare vertex at resonance: X has a pole")
    if abs(detuning) < 1e-9:
        # derivative of the numerator at resonance
        dV = v2_prime(ff, wl) / (2 * V) if V > 0 else 0.0
        X = ph * (dV + phi_abs / (2 * wl ** 1.5))
    else:
        X = (V * ph - phi_abs * ph / math.sqrt(wl)) / detuning
    Phi = V * ph - detuning * X
    s = phi_abs / math.sqrt(wl)
    elements = {
        "abs_ket": s * ph,                 # 11.0λ1
        "abs_bra": s * ph.conjugate(),     # 11.10λ
        "em_ket": s * ph.conjugate(),      # emission, ket side
        "em_bra": -s * ph,                 # emission, bra side: opposite relative sign
    }
    return {"target": "causal", "omega_lambda": wl, "X": {"11.0λ1": complex(X)},
            "Phi": {"11.0λ1": complex(Phi)}, "V": complex(V * ph), "phi_abs": phi_abs,
            "elements": {k: complex(v) for k, v in elements.items()}}


__all__ = ["DressingSet", "ParametrizationError", "build_chi_diag", "build_chi_dipolar",
           "verify_similarity", "build_X_and_phi_vertex", "dipolar_relations",
           "eigenvector_ratios", "physical_evolution_diag", "NORMALIZATION"]
