"""Worked examples for each operation, on the baseline and uncoupled models."""

import math

import numpy as np
import pytest
from scipy.optimize import newton

from subdyn import Kinetics, ModelSpec, Oracle, collision, continuum, greens
from subdyn.dressing import build_chi_diag, build_chi_dipolar, build_X_and_phi_vertex
from subdyn.errors import ConfigError, NearPoleError
from subdyn.model import FormFactor, eval_v2, spec_from_dict
from subdyn.oracle import basis_dimension, build_basis, build_hamiltonian, compare_kinetic, zeno_fit
from subdyn.subdyn import theta_passive

from conftest import fast_spec

BASE = ModelSpec()
FREE = BASE.with_coupling(0.0)
V2_1 = 1e-3 * math.exp(-0.1)


# --- model ----------------------------------------------------------------

def test_validation_examples():
    assert spec_from_dict({"atom": {"omega1": 1.0, "omega0": 0.0},
                           "coupling": {"g2": 1e-3, "cutoff_Omega": 10.0}}) == BASE
    with pytest.raises(ConfigError, match="omega1 > omega0"):
        spec_from_dict({"atom": {"omega1": 0.0, "omega0": 1.0}})
    with pytest.raises(ConfigError, match="nonnegative"):
        spec_from_dict({"coupling": {"g2": -1.0}})


def test_form_factor_examples():
    assert eval_v2(FormFactor(), 0.0) == 0.0
    assert eval_v2(FormFactor(), 1.0) == pytest.approx(9.0484e-4, rel=1e-4)
    assert eval_v2(FormFactor(g2=0.0), 1.0) == 0.0


# --- greens -----------------------------------------------------------------

def test_self_energy_examples():
    assert greens.eval_f(FREE, 1, 0.3 + 0.1j).value == 0
    f0 = greens.eval_f(BASE, 0, complex(BASE.omega0, 0.0)).value
    assert f0.imag == 0 and f0.real < 0
    # Sokhotski–Plemelj limit by ε-extrapolation
    lim = continuum.richardson_limit(lambda z: greens.eval_f(BASE, 1, z).value, 1.0, (1e-3, 1e-4, 1e-5))
    assert lim.imag == pytest.approx(-math.pi * V2_1, rel=1e-6)
    assert greens.eval_f(BASE, 1, 1 + 1e-8j).value.imag == pytest.approx(-2.8425e-3, rel=1e-4)


def test_eta_inv_examples():
    assert greens.eval_eta_inv(FREE, 1, 2.0).value == 1.0
    z = 1 + 0.5j
    o = Oracle(BASE, n_modes=200, n_max=2)
    ref = greens.eval_eta_inv(BASE, 1, z).value
    assert abs(o.resolvent_diag(1, z) - ref) / abs(ref) < 1e-3
    with pytest.raises(NearPoleError):
        greens.eval_eta_inv(FREE, 0, FREE.omega0)


def test_find_pole_examples():
    p = greens.find_pole(FREE, 1)
    assert (p.location, p.residue, p.solver_residual) == (1, 1, 0)
    ex = greens.find_pole(BASE, 1)
    assert ex.location.imag == pytest.approx(-math.pi * V2_1, rel=0.05)
    gr = greens.find_pole(BASE, 0)
    assert abs(gr.location.imag) < 1e-10 and gr.location.real < 0
    assert Oracle(BASE, n_modes=200, n_max=1).ground_energy() == pytest.approx(gr.location.real, abs=1e-6)


def test_bar_pole_examples():
    mk = lambda loc, kind: greens.PoleData(kind, loc, 1.0, 0.0)
    assert greens.bar_pole(mk(1 - 0.003j, "excited")).location == -1 - 0.003j
    assert greens.bar_pole(mk(-0.01 + 0j, "ground")).location == 0.01
    assert greens.bar_pole(greens.find_pole(FREE, 1)).location == -1


def test_liouville_examples():
    p = greens.liouville_poles(FREE)
    assert (p.theta_bar, p.delta10, p.delta01, p.A1sq) == (0, 1, -1, 1)
    # residue of 1/(z² − Δ²) at ±Δ
    assert p.A10 == pytest.approx(0.5) and p.A01 == pytest.approx(-0.5)
    b = greens.liouville_poles(BASE)
    assert b.theta_bar.imag == pytest.approx(-5.69e-3, rel=0.05)
    assert abs(b.delta01 + b.delta10.conjugate()) < 1e-12


# --- collision --------------------------------------------------------------

def test_W_diag_examples():
    assert collision.eval_W2_diag(FREE, "11.00", 0.2j) == 0
    w = collision.eval_W2_diag(BASE, "11.11", 0.0)
    assert w.imag == pytest.approx(-5.686e-3, rel=1e-3) and abs(w.real) < 1e-15
    assert abs(w + collision.eval_W2_diag(BASE, "00.11", 0.0)) < 1e-10


def test_appendix_b_examples():
    ab = collision.eval_W4_0000_at0(BASE)
    assert abs(ab.pairs["C1+C1'"]) / abs(ab.contributions["C1"]) < 1e-8
    assert abs(ab.pairs["C2+C2'"]) / abs(ab.contributions["C2"]) < 1e-8
    assert abs(ab.pairs["C34+C3'4'"]) / abs(ab.contributions["C3"]) < 1e-8
    assert abs(ab.total - ab.reference_total) / abs(ab.reference_total) < 1e-8


def test_dipolar_examples():
    for z in (0.5 + 0.1j, 1.2 + 0.3j, -0.7 + 0.2j):
        assert collision.dipolar_denominator(FREE, z) == pytest.approx(z * z - 1)
        s = collision.eval_W_dipolar(BASE, "10.10", z) + collision.eval_W_dipolar(BASE, "01.10", z)
        assert abs(s) < 1e-14
    root = newton(lambda z: collision.dipolar_denominator(BASE, z), 1.0 - 0.001j, tol=1e-14)
    assert abs(root - greens.liouville_poles(BASE).delta10) < 1e-6


def test_one_photon_examples():
    V = math.sqrt(eval_v2(FormFactor(), 0.7))
    assert collision.eval_W_one_photon(BASE, "11.0λ1", 0.7) == pytest.approx(V)
    assert collision.eval_W_one_photon(FREE, "11.0λ1", 0.7) == 0
    assert collision.eval_W_one_photon(BASE, "11.10λ", 0.7) == pytest.approx(-V)


# --- subdyn -----------------------------------------------------------------

def test_sigma_examples(kin):
    g = -kin.poles.theta_bar.imag
    for t in (0.0, 1 / g, 5 / g):
        S = kin.sigma_diag(t).matrix
        assert abs(S[0, 0] + S[1, 0] - 1) < 1e-10
    assert np.array_equal(kin.sigma_diag(0.0).matrix, kin.build_A_diag().matrix)
    # the decaying weight starts at 1 as the coupling goes to zero
    weak = Kinetics(fast_spec(1e-7))
    assert weak._ratios[2] == pytest.approx(1.0, abs=1e-5)


def test_A_examples(kin, kin_free):
    A = kin.build_A_diag().matrix
    assert abs(np.linalg.det(A) - kin.poles.A1sq) < 1e-10
    assert np.array_equal(kin_free.build_A_diag().matrix, np.eye(2))
    assert np.max(np.abs(A @ kin.invert_A_diag().matrix - np.eye(2))) < 1e-12


def test_theta_examples(kin):
    th = kin.build_theta_diag().matrix
    ev = np.sort_complex(np.linalg.eigvals(th))
    assert np.max(np.abs(ev - np.sort_complex([0, kin.poles.theta_bar]))) < 1e-10
    assert np.max(np.abs(th.sum(axis=0))) < 1e-12
    assert kin.theta_0000_order4()["relative_error"] < 1e-6


def test_dipolar_theta_examples(kin):
    a, b = kin.dipole_parts
    assert abs(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]) < 1e-8
    assert abs(b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]) < 1e-8
    assert kin.det_A_dipolar_bracket().real == pytest.approx(-4.0, rel=1e-3)
    ev = np.sort_complex(np.linalg.eigvals(kin.build_theta_dipolar().matrix))
    assert np.max(np.abs(ev - np.sort_complex([kin.poles.delta10, kin.poles.delta01]))) < 1e-8


def test_passive_photon_examples(kin):
    base = kin.build_theta_diag()
    assert np.array_equal(theta_passive(base, 0.0, "left").matrix, base.matrix)
    ev = np.sort_complex(np.linalg.eigvals(theta_passive(base, 0.8, "left").matrix))
    assert np.allclose(ev, np.sort_complex([0.8, 0.8 + kin.poles.theta_bar]))
    back = theta_passive(theta_passive(base, 0.8, "left"), 0.8, "right")
    assert np.allclose(back.matrix, base.matrix, atol=1e-15)


def test_absorption_examples(kin_free):
    assert np.array_equal(kin_free.theta_absorb(0.7, "ket")["Theta"].matrix, np.zeros((2, 2)))
    V = math.sqrt(1e-7 * 0.5 * math.exp(-0.05))
    th = Kinetics(fast_spec(1e-7)).theta_absorb(0.5, "ket")["Theta"]
    assert th["11.0λ1"] / V == pytest.approx(1.0, abs=1e-6)


# --- dressing ---------------------------------------------------------------

def test_chi_diag_examples(kin):
    d = build_chi_diag(kin)
    ci, th, c = d.chi_inv.matrix, kin.build_theta_diag().matrix, d.chi.matrix
    assert np.max(np.abs(ci @ th @ c - d.phi.matrix)) < 1e-10
    w11, w00 = kin.W0
    assert np.linalg.det(c) == pytest.approx((w11 - w00) / (w11 + w00), abs=1e-12)
    weak = build_chi_diag(Kinetics(BASE.with_coupling(1e-6)))
    assert np.allclose(weak.chi.matrix, np.eye(2), atol=1e-5)


def test_chi_dipolar_examples(kin, kin_free):
    d = build_chi_dipolar(kin)
    out = d.chi_inv.matrix @ kin.build_theta_dipolar().matrix @ d.chi.matrix
    assert np.max(np.abs(out - np.diag([kin.poles.delta10, kin.poles.delta01]))) < 1e-8
    weak = build_chi_dipolar(Kinetics(fast_spec(1e-8)))
    assert weak.free_param["x"] == pytest.approx(1.0, abs=1e-6)
    assert weak.free_param["y"] == pytest.approx(0.0, abs=1e-3)
    assert max(d.invariant_residuals().values()) < 1e-12
    f = build_chi_dipolar(kin_free)
    assert f.free_param["x"] == 1.0 and f.free_param["y"] == 0.0


def test_vertex_examples():
    for w in (0.3, 1.0, 4.0):
        out = build_X_and_phi_vertex(BASE, w, "bare")
        assert out["X"]["11.0λ1"] == 0
        assert out["Phi"]["11.0λ1"] == pytest.approx(math.sqrt(eval_v2(FormFactor(), w)))
    res = build_X_and_phi_vertex(BASE, 1.0, "causal")
    assert res["Phi"]["11.0λ1"] == pytest.approx(math.sqrt(V2_1), abs=1e-12)
    c = build_X_and_phi_vertex(BASE, 2.0, "causal")
    e = c["elements"]
    assert e["abs_ket"] == pytest.approx(c["phi_abs"] / math.sqrt(2.0))
    assert e["em_bra"] == pytest.approx(-c["phi_abs"] / math.sqrt(2.0))


# --- oracle -----------------------------------------------------------------

def test_basis_examples():
    assert build_basis(BASE, n_modes=1, n_max=1).dimension == 4
    assert build_basis(BASE, n_modes=2, n_max=2).dimension == 12
    assert basis_dimension(200, 1) == 402


def test_hamiltonian_examples():
    H0 = build_hamiltonian(FREE, build_basis(FREE, n_modes=4, n_max=2)).toarray()
    assert np.array_equal(H0, np.diag(np.diag(H0)))
    b = build_basis(BASE, n_modes=4, n_max=2)
    H = build_hamiltonian(BASE, b).toarray()
    for k in range(4):
        Vk = b.mode_couplings[k]
        assert H[b.find(0, (k,)), b.find(1)] == pytest.approx(Vk)
        assert H[b.find(1, (k,)), b.find(0)] == pytest.approx(Vk)
    assert np.array_equal(H, H.conj().T)


def test_evolution_examples():
    o = Oracle(FREE, n_modes=5, n_max=1)
    ev = o.evolve([0.0, 3.0, 50.0])
    assert ev.amplitude[0] == 1 and ev.population[0] == 1
    assert np.allclose(ev.amplitude, np.exp(-1j * np.array([0.0, 3.0, 50.0])))
    assert np.allclose(ev.population, 1.0)


def test_oracle_resolvent_examples():
    assert Oracle(FREE, n_modes=5, n_max=1).resolvent_diag(1, 2.0 + 1e-12j) == pytest.approx(1.0)
    o = Oracle(BASE, n_modes=50, n_max=2)
    z = 0.3 + 10j
    assert abs(o.resolvent_diag(1, z) - 1 / z) < 2 / abs(z) ** 2


def test_compare_examples():
    t = np.linspace(0, 1, 5)
    assert compare_kinetic(t, np.exp(-t), np.exp(-t)).max_relative == 0


def test_truncation_convergence_resonant():
    s = BASE.with_oracle(grid="resonant")
    gamma = -2 * greens.find_pole(s, 1).location.imag
    t = np.linspace(0.2 / gamma, 3 / gamma, 15)
    p1 = Oracle(s, n_max=1).evolve(t).population
    p2 = Oracle(s, n_max=2).evolve(t).population
    assert np.max(np.abs(p1 - p2)) < 0.01


def test_zeno_region():
    # 1 − P ∝ t² holds inside 1/ω_max; beyond it the flat form factor takes over
    t = np.linspace(0, 1 / BASE.oracle.omega_max, 15)
    ev = Oracle(BASE, n_modes=200, n_max=1).evolve(t)
    assert zeno_fit(t, ev.population)["r2"] > 0.999
