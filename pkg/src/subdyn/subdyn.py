"""Vacuum subdynamics blocks: Σ(t), A, A⁻¹ and Θ for each closed sector.

Diagonal sector basis [11, 00]; dipole sector basis [10, 01]. The reduced
resolvent of each sector has two poles; Σ(t) is the sum of their residues
times e^{−izt}, A = Σ(0) and Θ follows from Σ(t) = exp(−iΘt)·A.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import collision, greens
from .errors import ContractViolation, SingularError
from .model import ModelSpec, ensure_valid

DIAG = ["11", "00"]
DIPOLE = ["10", "01"]
J = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(eq=False)
class SectorBlock:
    sector: str
    basis: list
    matrix: np.ndarray
    label: str
    cols: list | None = None
    meta: dict = field(default_factory=dict)

    @property
    def col_basis(self) -> list:
        return self.cols if self.cols is not None else self.basis

    def __getitem__(self, element: str) -> complex:
        row, col = element.split(".")
        return complex(self.matrix[self.basis.index(row), self.col_basis.index(col)])


def _inv2(M: np.ndarray, what: str) -> np.ndarray:
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det) < 1e-14:
        raise SingularError(f"{what} is singular (det = {det:.3e})")
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) / det


def _split_eval(Rfun, poles, residues, z0: complex, rho: float = 1e-3) -> np.ndarray:
    """R(z0) as displayed poles plus a regular part fitted on four nearby points."""
    rho = min(rho, 0.1 * min(abs(z0 - p) for p in poles))
    acc = 0
    for k in range(4):
        z = z0 + rho * cmath.exp(0.5j * np.pi * k)
        acc = acc + Rfun(z) - sum(r / (z - p) for p, r in zip(poles, residues))
    reg = acc / 4
    return reg + sum(r / (z0 - p) for p, r in zip(poles, residues))


class Kinetics:
    """Kinetic description of one model: poles, W values and sector blocks.

    Construction is cheap; quantities are computed lazily and cached.
    """

    def __init__(self, spec: ModelSpec, poles: greens.LiouvillePoles | None = None):
        self.spec = ensure_valid(spec)
        self._poles = poles

    # --- shared inputs -------------------------------------------------
    @cached_property
    def poles(self) -> greens.LiouvillePoles:
        return self._poles if self._poles is not None else greens.liouville_poles(self.spec)

    @property
    def free(self) -> bool:
        return self.spec.form_factor.g2 == 0

    @cached_property
    def W0(self) -> tuple:
        """(W11.11(0), W00.00(0)); the latter includes the fourth order when enabled."""
        w11 = collision.eval_W2_diag(self.spec, "11.11", 0.0)
        w00 = collision.W00_at0(self.spec)
        return w11, w00

    @cached_property
    def Wtheta(self) -> tuple:
        th = self.poles.theta_bar
        return (collision.eval_W2_diag(self.spec, "11.11", th),
                collision.eval_W2_diag(self.spec, "00.00", th))

    @cached_property
    def _ratios(self) -> tuple:
        """W11(0)/S, W00(0)/S, A1sq·W11(θ̄)/θ̄, A1sq·W00(θ̄)/θ̄ with their free limits."""
        if self.free:
            return 1.0 + 0j, 0j, 1.0 + 0j, 0j
        w11, w00 = self.W0
        S = w11 + w00
        if abs(S) < 1e-14:
            raise SingularError(f"W11.11(0)+W00.00(0) = {S:.3e} is degenerate")
        th = self.poles.theta_bar
        a = self.poles.A1sq
        t11, t00 = self.Wtheta
        return w11 / S, w00 / S, a * t11 / th, a * t00 / th

    # --- diagonal sector -----------------------------------------------
    def _diag_parts(self):
        r11, r00, b11, b00 = self._ratios
        P0 = np.array([[r00, r00], [r11, r11]], dtype=complex)
        B = np.array([[b11, -b00], [-b11, b00]], dtype=complex)
        return P0, B

    def sigma_diag(self, t: float) -> SectorBlock:
        if t < 0:
            raise ContractViolation("Σ(t) is defined for t ≥ 0 only")
        P0, B = self._diag_parts()
        M = P0 + cmath.exp(-1j * self.poles.theta_bar * t) * B
        return SectorBlock("diag", DIAG, M, f"Sigma({t:g})")

    def alpha_beta_diag(self):
        """Residue matrices at z = 0 (α) and z = θ̄ (β)."""
        return self._diag_parts()

    def build_A_diag(self) -> SectorBlock:
        P0, B = self._diag_parts()
        return SectorBlock("diag", DIAG, P0 + B, "A")

    def invert_A_diag(self) -> SectorBlock:
        A = self.build_A_diag().matrix
        return SectorBlock("diag", DIAG, _inv2(A, "diagonal A"), "Ainv")

    def build_theta_diag(self) -> SectorBlock:
        r11, r00, _, _ = self._ratios
        th = self.poles.theta_bar
        M = th * np.array([[r11, -r00], [-r11, r00]], dtype=complex)
        return SectorBlock("diag", DIAG, M, "Theta")

    def theta_0000_order4(self) -> dict:
        """Leading Θ00.00 = θ̄⁽²⁾·W00⁽⁴⁾(0)/W11⁽²⁾(0) next to its closed-form prediction."""
        from .continuum import inverse_square_moment

        w11 = collision.eval_W2_diag(self.spec, "11.11", 0.0)
        th2 = w11 + collision.eval_W2_diag(self.spec, "00.00", 0.0)
        if self.free:
            return {"value": 0j, "prediction": 0j, "theta2": 0j, "relative_error": 0.0}
        w4 = collision.eval_W4_0000_at0(self.spec).total
        val = th2 * w4 / w11
        pred = th2 * inverse_square_moment(self.spec, self.spec.gap)
        return {"value": val, "prediction": pred, "theta2": th2,
                "relative_error": abs(val - pred) / abs(pred)}

    def det_A_formula(self) -> complex:
        """|Ā1|²·(W11(θ̄)+W00(θ̄))/θ̄, which collapses to |Ā1|² on the θ̄ equation."""
        _, _, b11, b00 = self._ratios
        return b11 + b00

    # --- dipole sector -------------------------------------------------
    @cached_property
    def dipole_parts(self) -> tuple:
        p = self.poles
        if self.free:
            alpha = np.array([[1, 0], [0, 0]], dtype=complex)
            beta = np.array([[0, 0], [0, 1]], dtype=complex)
            return alpha, beta
        alpha = p.A10 * collision.dipolar_numerator(self.spec, p.delta10)
        beta = p.A01 * collision.dipolar_numerator(self.spec, p.delta01)
        return alpha, beta

    def sigma_dipolar(self, t: float) -> SectorBlock:
        if t < 0:
            raise ContractViolation("Σ(t) is defined for t ≥ 0 only")
        a, b = self.dipole_parts
        p = self.poles
        M = cmath.exp(-1j * p.delta10 * t) * a + cmath.exp(-1j * p.delta01 * t) * b
        return SectorBlock("dipole", DIPOLE, M, f"Sigma({t:g})")

    def build_A_dipolar(self) -> SectorBlock:
        a, b = self.dipole_parts
        return SectorBlock("dipole", DIPOLE, a + b, "A")

    def det_A_dipolar(self) -> complex:
        """Determinant of the dipolar A written as in the α/β reduction."""
        a, b = self.dipole_parts
        return (a[0, 0] * b[1, 1] + a[1, 1] * b[0, 0] - a[1, 0] * b[0, 1] - a[0, 1] * b[1, 0])

    def det_A_dipolar_bracket(self) -> complex:
        """det A_D divided by A10·A01; its free value is −4(ω1−ω0)²."""
        if self.free:
            return complex(-4 * self.spec.gap ** 2)
        return self.det_A_dipolar() / (self.poles.A10 * self.poles.A01)

    def invert_A_dipolar(self) -> SectorBlock:
        A = self.build_A_dipolar().matrix
        return SectorBlock("dipole", DIPOLE, _inv2(A, "dipolar A"), "Ainv")

    def build_theta_dipolar(self) -> SectorBlock:
        a, b = self.dipole_parts
        p = self.poles
        TA = p.delta10 * a + p.delta01 * b
        M = TA @ self.invert_A_dipolar().matrix
        return SectorBlock("dipole", DIPOLE, M, "Theta")

    def theta_dipolar_printed(self) -> np.ndarray:
        """Element-by-element product form with a single A⁻¹ factor per element."""
        a, b = self.dipole_parts
        p = self.poles
        det = self.det_A_dipolar()
        TA = p.delta10 * a + p.delta01 * b
        A = a + b
        M = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            j = 1 - i
            M[i, i] = TA[i, i] * A[j, j] / det
            M[j, i] = -TA[j, i] * A[j, i] / det
        return M

    # --- photon sectors ------------------------------------------------
    def theta_absorb(self, omega_lambda: float, side: str = "ket") -> dict:
        """Θ from one-photon states to the diagonal sector, first order in the vertex.

        Returns the Θ block together with the A, ΘA and mixed A⁻¹ blocks it
        was assembled from, and the residual between the pole-plus-regular
        evaluation of the shifted resolvents and their direct evaluation.
        """
        if side not in ("ket", "bra"):
            raise ContractViolation("side must be 'ket' or 'bra'")
        spec = self.spec
        wl = float(omega_lambda)
        s = 1.0 if side == "ket" else -1.0
        cols = ["1λ0", "0λ1"] if side == "ket" else ["10λ", "01λ"]
        Wv = collision.one_photon_block(spec, wl, side)
        if self.free or not Wv.any():
            Ax = np.zeros((2, 2), dtype=complex)
            TAx = Wv.astype(complex) if self.free else np.zeros((2, 2), dtype=complex)
            return self._absorb_finish(Ax, TAx, cols, side, wl, 0.0)
        p = self.poles
        al_d, be_d = self._diag_parts()
        al_o, be_o = self.dipole_parts
        Ro = lambda z: collision.reduced_resolvent_dipolar(spec, z)
        Rd = lambda z: collision.reduced_resolvent_diag(spec, z)
        o_poles, o_res = (p.delta10, p.delta01), (al_o, be_o)
        d_poles, d_res = (0j, p.theta_bar), (al_d, be_d)

        pts_o = (-s * wl, p.theta_bar - s * wl)
        pts_d = (p.delta10 + s * wl, p.delta01 + s * wl)
        Ro_v = [_split_eval(Ro, o_poles, o_res, z) for z in pts_o]
        Rd_v = [_split_eval(Rd, d_poles, d_res, z) for z in pts_d]
        rel = lambda v, d: np.max(np.abs(v - d)) / max(np.max(np.abs(d)), 1e-300)
        resid = max(max(rel(v, Ro(z)) for v, z in zip(Ro_v, pts_o)),
                    max(rel(v, Rd(z)) for v, z in zip(Rd_v, pts_d)))
        Ax = (al_d @ Wv @ Ro_v[0] + be_d @ Wv @ Ro_v[1]
              + Rd_v[0] @ Wv @ al_o + Rd_v[1] @ Wv @ be_o)
        TAx = (p.theta_bar * be_d @ Wv @ Ro_v[1]
               + pts_d[0] * Rd_v[0] @ Wv @ al_o + pts_d[1] * Rd_v[1] @ Wv @ be_o)
        return self._absorb_finish(Ax, TAx, cols, side, wl, resid)

    def _absorb_finish(self, Ax, TAx, cols, side, wl, resid) -> dict:
        Th_d = self.build_theta_diag().matrix
        Ao_inv = self.invert_A_dipolar().matrix
        Ad_inv = self.invert_A_diag().matrix
        # block inversion of [[A_d, A_x], [0, A_o]]: the mixed term enters with a minus sign
        Theta_x = -Th_d @ Ax @ Ao_inv + TAx @ Ao_inv
        Ainv_x = -Ad_inv @ Ax @ Ao_inv
        meta = {"omega_lambda": wl, "side": side, "split_residual": float(resid)}
        mk = lambda M, lab: SectorBlock("absorb_photon", DIAG, M, lab, cols=cols, meta=meta)
        return {"Theta": mk(Theta_x, "Theta"), "A": mk(Ax, "A"), "ThetaA": mk(TAx, "ThetaA"),
                "Ainv": mk(Ainv_x, "Ainv"), "split_residual": float(resid)}


def theta_passive(base: SectorBlock, omega_lambda: float, side: str) -> SectorBlock:
    """Θ with a spectator photon line: ±ω_λ·I added to an atomic-sector Θ."""
    if base.label != "Theta":
        raise ContractViolation("theta_passive needs a Theta block")
    sign = {"left": 1.0, "right": -1.0}.get(side)
    if sign is None:
        raise ContractViolation("side must be 'left' or 'right'")
    M = base.matrix + sign * omega_lambda * np.eye(len(base.basis))
    meta = dict(base.meta, omega_lambda=omega_lambda, side=side)
    return SectorBlock("passive_photon", list(base.basis), M, "Theta", meta=meta)


def expm_theta(theta: SectorBlock, t: float) -> np.ndarray:
    """exp(−iΘt) for a 2×2 block by eigendecomposition."""
    w, V = np.linalg.eig(theta.matrix)
    return V @ np.diag(np.exp(-1j * w * t)) @ np.linalg.inv(V)


__all__ = ["SectorBlock", "Kinetics", "theta_passive", "expm_theta", "DIAG", "DIPOLE"]
