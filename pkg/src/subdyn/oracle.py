"""Exact reference: the full Hamiltonian on a truncated Fock space of discrete modes.

The coupling σx·(a_k + a_k†) conserves the parity (atom + photon number) mod 2,
so the evolution of |1,vac⟩ and the resolvent diagonals live in one parity
sector each. Small sectors are diagonalized densely; larger ones are
propagated with a Chebyshev expansion of e^{−iHΔt}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.optimize import curve_fit
from scipy.sparse.linalg import eigsh, spsolve
from scipy.special import jv

from . import _kernels
from .errors import ContractViolation, ConvergenceError, ResourceError
from .model import ModelSpec, ensure_valid, eval_v2


@dataclass(frozen=True)
class FockState:
    atom: int
    modes: tuple           # occupied mode indices, sorted, repeated by occupation

    @property
    def total_photons(self) -> int:
        return len(self.modes)

    @property
    def occupation(self) -> dict:
        occ: dict = {}
        for k in self.modes:
            occ[k] = occ.get(k, 0) + 1
        return occ

    @property
    def parity(self) -> int:
        return (self.atom + len(self.modes)) % 2


@dataclass(eq=False)
class FockBasis:
    n_modes: int
    mode_frequencies: np.ndarray
    mode_weights: np.ndarray
    mode_couplings: np.ndarray
    n_max: int
    states: list
    grid: str = "uniform"
    index: dict = field(default_factory=dict, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def find(self, atom: int, modes=()) -> int:
        return self.index[(atom, tuple(sorted(modes)))]


def basis_dimension(n_modes: int, n_max: int) -> int:
    return sum(2 * math.comb(n_modes + n - 1, n) for n in range(n_max + 1))


def mode_grid(spec: ModelSpec, n_modes: int, omega_max: float, grid: str = "uniform"):
    """Mode frequencies and quadrature weights on (0, omega_max].

    ``uniform``: midpoints of n equal cells. ``resonant``: ω = Δ + a·tan(s) with
    s on a uniform midpoint grid and weights from the mapped cell edges. This
    packs modes around the transition with density ∝ 1/((ω−Δ)² + a²).
    """
    if grid == "uniform":
        dw = omega_max / n_modes
        w = (np.arange(n_modes) + 0.5) * dw
        return w, np.full(n_modes, dw)
    if grid == "resonant":
        a = spec.oracle.resonance_width
        D = spec.gap
        lo, hi = math.atan(-D / a), math.atan((omega_max - D) / a)
        edges = D + a * np.tan(np.linspace(lo, hi, n_modes + 1))
        edges[0], edges[-1] = 0.0, omega_max
        s = lo + (np.arange(n_modes) + 0.5) * (hi - lo) / n_modes
        # exact cell widths: the far cells are too stretched for a midpoint Jacobian
        return D + a * np.tan(s), np.diff(edges)
    raise ContractViolation(f"unknown mode grid {grid!r}")


def build_basis(spec: ModelSpec, n_modes: int | None = None, omega_max: float | None = None,
                n_max: int | None = None, grid: str | None = None) -> FockBasis:
    """Enumerate states ordered by (photon number, occupied modes, atom)."""
    o = spec.oracle
    n_modes = o.n_modes if n_modes is None else n_modes
    omega_max = o.omega_max if omega_max is None else omega_max
    n_max = o.n_max if n_max is None else n_max
    grid = o.grid if grid is None else grid
    if n_modes < 1 or n_max < 1:
        raise ContractViolation("need n_modes ≥ 1 and n_max ≥ 1")
    dim = basis_dimension(n_modes, n_max)
    if dim > o.basis_cap:
        raise ResourceError(f"basis dimension {dim} exceeds the cap {o.basis_cap}", dimension=dim)
    w, wt = mode_grid(spec, n_modes, omega_max, grid)
    V = np.sqrt(eval_v2(spec.form_factor, w) * wt)
    states, index = [], {}
    for n in range(n_max + 1):
        for modes in itertools.combinations_with_replacement(range(n_modes), n):
            for atom in (0, 1):
                index[(atom, modes)] = len(states)
                states.append(FockState(atom, modes))
    return FockBasis(n_modes, w, wt, V, n_max, states, grid, index)


def build_hamiltonian(spec: ModelSpec, basis: FockBasis) -> sp.csr_matrix:
    """H = ω_atom + Σ n_k ω_k + Σ V_k σx (a_k + a_k†), real symmetric CSR."""
    om = (spec.omega0, spec.omega1)
    w, V = basis.mode_frequencies, basis.mode_couplings
    n = basis.dimension
    diag = np.array([om[s.atom] + sum(w[k] for k in s.modes) for s in basis.states])
    rows, cols, vals = [], [], []
    for i, s in enumerate(basis.states):
        if not s.modes:
            continue
        occ = s.occupation
        for k, nk in occ.items():
            if V[k] == 0.0:
                continue
            lower = list(s.modes)
            lower.remove(k)
            j = basis.index[(1 - s.atom, tuple(lower))]
            amp = V[k] * math.sqrt(nk)
            rows += [i, j]
            cols += [j, i]
            vals += [amp, amp]
    H = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    H = H + sp.diags(diag)
    H = sp.csr_matrix(H)
    H.sort_indices()
    return H


@dataclass
class Evolution:
    times: np.ndarray
    amplitude: np.ndarray
    population: np.ndarray
    norm: np.ndarray
    truncation_weight: np.ndarray
    method: str


def chebyshev_coefficients(scale: float, shift: float, dt: float, tol: float = 1e-16) -> np.ndarray:
    """Coefficients of e^{−iHdt} in T_k((H−shift)/scale), including the global phase."""
    x = scale * dt
    kmax = int(x + 12 * max(x, 1.0) ** (1 / 3) + 30)
    k = np.arange(kmax)
    c = (2.0 - (k == 0)) * (-1j) ** k * jv(k, x)
    tail = np.nonzero(np.abs(c) > tol)[0]
    c = c[: tail[-1] + 1] if tail.size else c[:1]
    return c * np.exp(-1j * shift * dt)


class Oracle:
    """Truncated-Fock-space reference for one model."""

    def __init__(self, spec: ModelSpec, n_modes: int | None = None, n_max: int | None = None,
                 omega_max: float | None = None, grid: str | None = None,
                 backend: str | None = None):
        self.spec = ensure_valid(spec)
        self.basis = build_basis(self.spec, n_modes, omega_max, n_max, grid)
        self.H = build_hamiltonian(self.spec, self.basis)
        self.backend = backend or _kernels.BACKEND

    # --- sectors ---------------------------------------------------------
    def _sector(self, parity: int):
        idx = np.array([i for i, s in enumerate(self.basis.states) if s.parity == parity])
        Hs = sp.csr_matrix(self.H[idx][:, idx])
        Hs.sort_indices()
        return idx, Hs

    @cached_property
    def odd(self):
        return self._sector(1)

    @cached_property
    def even(self):
        return self._sector(0)

    def _start(self, level: int):
        idx, Hs = self.odd if level == 1 else self.even
        pos = int(np.searchsorted(idx, self.basis.find(level)))
        return idx, Hs, pos

    @cached_property
    def _dense_odd(self):
        idx, Hs = self.odd
        return eigh(Hs.toarray())

    def uses_dense(self) -> bool:
        return len(self.odd[0]) <= self.spec.oracle.dense_cap

    # --- time evolution --------------------------------------------------
    def evolve(self, times) -> Evolution:
        """Exact evolution of |1,vac⟩ sampled at ``times`` (sorted, ≥ 0)."""
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or (times < 0).any() or (np.diff(times) < 0).any():
            raise ContractViolation("times must be a sorted sequence of t ≥ 0")
        idx, Hs, pos = self._start(1)
        atoms = np.array([self.basis.states[i].atom for i in idx])
        top = np.array([self.basis.states[i].total_photons == self.basis.n_max for i in idx])
        n = len(idx)
        amps, pops, norms, trunc = [], [], [], []

        def record(psi):
            p = np.abs(psi) ** 2
            amps.append(psi[pos])
            pops.append(p[atoms == 1].sum())
            norms.append(p.sum())
            trunc.append(p[top].sum())

        if self.uses_dense():
            E, U = self._dense_odd
            c = U[pos, :].conj()
            for t in times:
                record(U @ (np.exp(-1j * E * t) * c))
            method = "dense"
        else:
            indptr, indices, data = Hs.indptr, Hs.indices, Hs.data.astype(float)
            absrow = np.abs(Hs).sum(axis=1).A1
            d = Hs.diagonal()
            lo, hi = float((2 * d - absrow).min()), float(absrow.max())
            scale, shift = 0.5 * (hi - lo) * 1.01, 0.5 * (hi + lo)
            psi = np.zeros(n, dtype=complex)
            psi[pos] = 1.0
            now = 0.0
            max_dt = 200.0 / scale      # about 250 terms per step
            for t in times:
                while t - now > 1e-14:
                    dt = min(t - now, max_dt)
                    coeffs = chebyshev_coefficients(scale, shift, dt)
                    psi = _kernels.chebyshev_apply(indptr, indices, data, psi, coeffs, scale, shift,
                                                   backend=self.backend)
                    now += dt
                record(psi)
            method = f"chebyshev/{self.backend}"
        return Evolution(times, np.array(amps), np.array(pops), np.array(norms), np.array(trunc), method)

    def survival_amplitude(self, t: float) -> complex:
        return complex(self.evolve([t]).amplitude[0])

    def excited_population(self, t: float) -> float:
        return float(self.evolve([t]).population[0])

    # --- resolvent and spectrum -----------------------------------------
    @cached_property
    def _layers(self):
        """Per parity: (indices of the lower layers, their block, coupling to the top, top energies)."""
        out = {}
        for parity in (0, 1):
            idx, Hs = self.odd if parity == 1 else self.even
            top = np.array([self.basis.states[i].total_photons == self.basis.n_max for i in idx])
            lo = np.nonzero(~top)[0]
            hi = np.nonzero(top)[0]
            out[parity] = (lo, sp.csc_matrix(Hs[lo][:, lo]), sp.csr_matrix(Hs[lo][:, hi]),
                           Hs.diagonal()[hi])
        return out

    def _effective(self, parity: int, z: complex):
        """z − H folded onto the lower layers.

        The top photon layer has no internal couplings, so its block is
        diagonal and can be eliminated exactly (Schur complement).
        """
        lo, Hll, C, d = self._layers[parity]
        fold = C @ sp.diags(1.0 / (z - d)) @ C.T
        return lo, z * sp.identity(len(lo), dtype=complex, format="csc") - Hll - fold

    def resolvent_diag(self, level: int, z: complex) -> complex:
        """⟨level,vac|(z − H)⁻¹|level,vac⟩ for Im z > 0."""
        z = complex(z)
        if not z.imag > 0:
            raise ContractViolation("the oracle resolvent needs Im z > 0")
        if level not in (0, 1):
            raise ContractViolation("level must be 0 or 1")
        idx, _, pos = self._start(level)
        lo, M = self._effective(level, z)
        p = int(np.searchsorted(lo, pos))
        e = np.zeros(len(lo), dtype=complex)
        e[p] = 1.0
        x = np.linalg.solve(M.toarray(), e) if len(lo) <= self.spec.oracle.dense_cap else spsolve(M.tocsc(), e)
        if not np.all(np.isfinite(x)):
            raise ConvergenceError(f"resolvent solve failed at z = {z}")
        return complex(x[p])

    def ground_energy(self, guess: float | None = None, tol: float = 1e-14) -> float:
        """Lowest eigenvalue of H (it lies in the parity sector of |0,vac⟩).

        Solved self-consistently on the folded problem E = min eig(H_eff(E)),
        which converges in a few steps because H_eff depends weakly on E.
        """
        idx, Hs = self.even
        if len(idx) <= self.spec.oracle.dense_cap:
            return float(np.linalg.eigvalsh(Hs.toarray())[0])
        lo, Hll, C, d = self._layers[0]
        if len(lo) > self.spec.oracle.dense_cap:
            vals = eigsh(Hs, k=1, which="SA", return_eigenvectors=False, tol=tol)
            return float(vals.min())
        E = self.spec.omega0 if guess is None else float(guess)
        base = Hll.toarray()
        for _ in range(100):
            if E >= d.min():
                raise ConvergenceError("ground energy iteration left the folded region", last=E)
            Heff = base + (C @ sp.diags(1.0 / (E - d)) @ C.T).toarray()
            E_new = float(np.linalg.eigvalsh(Heff)[0])
            if abs(E_new - E) < tol:
                return E_new
            E = E_new
        raise ConvergenceError("ground energy iteration did not converge", last=E)

    def is_hermitian(self) -> float:
        D = self.H - self.H.conj().T
        return float(abs(D).max()) if D.nnz else 0.0


# --- fits and comparisons ------------------------------------------------

def exponential_fit(times, population, window) -> dict:
    """Decay rate of P(t) on ``window`` by a log-linear fit and by a·e^{−γt} + c."""
    t = np.asarray(times)
    p = np.asarray(population)
    m = (t >= window[0]) & (t <= window[1])
    if m.sum() < 3:
        raise ContractViolation("fewer than three samples in the fit window")
    tt, pp = t[m], p[m]
    if (pp <= 0).any():
        raise ConvergenceError("population not positive in the fit window")
    slope, icpt = np.polyfit(tt, np.log(pp), 1)
    out = {"rate_loglinear": float(-slope), "amplitude_loglinear": float(math.exp(icpt))}
    try:
        popt, _ = curve_fit(lambda x, a, g, c: a * np.exp(-g * x) + c, tt, pp,
                            p0=(math.exp(icpt), -slope, 0.0), maxfev=20000)
        out.update(rate_offset=float(popt[1]), amplitude_offset=float(popt[0]),
                   offset=float(popt[2]))
    except RuntimeError:
        out.update(rate_offset=float("nan"), amplitude_offset=float("nan"), offset=float("nan"))
    return out


def zeno_fit(times, population) -> dict:
    """Least-squares fit of 1 − P(t) by c·t² through the origin, with its r²."""
    t = np.asarray(times, dtype=float)
    y = 1.0 - np.asarray(population, dtype=float)
    x = t ** 2
    c = float(np.dot(x, y) / np.dot(x, x))
    ss_res = float(np.sum((y - c * x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return {"curvature": c, "r2": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0}


@dataclass
class ComparisonReport:
    window: tuple
    max_relative: float
    rms_relative: float
    max_truncation_weight: float
    n_points: int


def compare_kinetic(times, predicted, observed, window=None, truncation_weight=None) -> ComparisonReport:
    t = np.asarray(times, dtype=float)
    pr, ob = np.asarray(predicted), np.asarray(observed)
    if pr.shape != ob.shape or pr.shape != t.shape:
        raise ContractViolation("prediction and oracle series need the same time grid")
    lo, hi = window if window is not None else (t.min(), t.max())
    m = (t >= lo) & (t <= hi)
    rel = np.abs(pr[m] - ob[m]) / np.maximum(np.abs(ob[m]), 1e-300)
    tw = float(np.max(truncation_weight[m])) if truncation_weight is not None and m.any() else 0.0
    return ComparisonReport((float(lo), float(hi)), float(rel.max()) if m.any() else 0.0,
                            float(np.sqrt(np.mean(rel ** 2))) if m.any() else 0.0, tw, int(m.sum()))


__all__ = [
    "FockState", "FockBasis", "Oracle", "Evolution", "ComparisonReport", "basis_dimension",
    "mode_grid", "build_basis", "build_hamiltonian", "chebyshev_coefficients", "exponential_fit",
    "zeno_fit", "compare_kinetic",
]
