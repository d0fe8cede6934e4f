"""Pipeline stages shared by the CLI and the acceptance tests.

Each stage fills a RunReport with data sections and residual checks.
"""

from __future__ import annotations

import math

import numpy as np

from . import collision, dressing, greens
from .model import ModelSpec, eval_v2
from .oracle import Oracle, compare_kinetic, exponential_fit
from .report import RunReport, block
from .subdyn import Kinetics, expm_theta, theta_passive

PHOTON_FREQUENCIES = (0.5, 1.0, 2.0)


def decay_rate(spec: ModelSpec) -> float:
    return -2.0 * greens.find_pole(spec, 1).location.imag


def time_scale(spec: ModelSpec) -> float:
    """1/γ, or a fixed 100 when there is no decay."""
    g = decay_rate(spec)
    return 1.0 / g if g > 0 else 100.0


def stage_poles(kin: Kinetics, rep: RunReport) -> None:
    spec = kin.spec
    ex, gr = greens.find_pole(spec, 1), greens.find_pole(spec, 0)
    p = kin.poles
    rep.add("poles", {
        "excited": ex, "ground": gr, "bar_excited": greens.bar_pole(ex),
        "bar_ground": greens.bar_pole(gr), "liouville": p,
    })
    rows = []
    for z in (0j, p.theta_bar):
        for el in ("11.11", "00.00", "11.00", "00.11"):
            rows.append({"element": el, "order": 2, "z": z,
                         "value": collision.eval_W2_diag(spec, el, z)})
    for z in (p.delta10, p.delta01):
        for el in ("10.10", "01.01", "10.01", "01.10"):
            rows.append({"element": el, "order": 2, "z": z,
                         "value": collision.eval_W_dipolar(spec, el, z)})
    rows.append({"element": "00.00", "order": 4, "z": 0j, "value": kin.W0[1] - rows[1]["value"]})
    rep.add("W_table", rows)

    gamma = -2 * ex.location.imag
    golden = greens.golden_rule_width(spec)
    rep.check("golden_rule_width_relative", abs(gamma - golden) / golden if golden else gamma, 0.05)
    rep.check("excited_pole_equation", ex.solver_residual, 1e-10)
    rep.check("ground_pole_equation", gr.solver_residual, 1e-10)
    g2 = spec.form_factor.g2
    rep.check("ground_pole_imaginary_part", gr.location.imag, 1e-10 * g2)
    rep.check("theta_bar_real_relative",
              abs(p.theta_bar.real) / abs(p.theta_bar) if p.theta_bar else 0.0, 1e-10)
    rep.check("delta01_mirror", p.delta01 + p.delta10.conjugate(), 1e-12)
    rep.check("A01_mirror", p.A01 + p.A10.conjugate(), 1e-10)
    for k, v in p.residuals.items():
        if k.endswith("equation"):
            rep.check(f"liouville_{k}", v, 1e-10)


def _times(spec):
    T = time_scale(spec)
    return (0.0, T, 3 * T)


def stage_identities(kin: Kinetics, rep: RunReport) -> None:
    """Diagonal and dipole sector blocks with their exact identities."""
    spec, p = kin.spec, kin.poles
    A, Ai, Th = kin.build_A_diag(), kin.invert_A_diag(), kin.build_theta_diag()
    times = _times(spec)
    rep.add("diag", {"A": block(A), "Ainv": block(Ai), "Theta": block(Th),
                     "Sigma": [block(kin.sigma_diag(t)) for t in times],
                     "times": list(times), "det_A_formula": kin.det_A_formula()})
    rep.check("diag_det_A_equals_A1sq", np.linalg.det(A.matrix) - p.A1sq, 1e-10)
    rep.check("diag_A_Ainv", np.max(np.abs(A.matrix @ Ai.matrix - np.eye(2))), 1e-12)
    for t in times:
        S = kin.sigma_diag(t).matrix
        rep.check(f"diag_sigma_column_sum_t={t:.6g}", S[0, 0] + S[1, 0] - 1, 1e-10)
        rep.check(f"diag_expm_theta_A_t={t:.6g}",
                  np.max(np.abs(expm_theta(Th, t) @ A.matrix - S)), 1e-8)
    rep.check("diag_theta_column_sums", np.max(np.abs(Th.matrix.sum(axis=0))), 1e-12)
    ev = np.sort_complex(np.linalg.eigvals(Th.matrix))
    rep.check("diag_theta_eigenvalues", np.max(np.abs(ev - np.sort_complex(np.array([0j, p.theta_bar])))), 1e-8)

    Ad, Adi, Thd = kin.build_A_dipolar(), kin.invert_A_dipolar(), kin.build_theta_dipolar()
    a, b = kin.dipole_parts
    printed = kin.theta_dipolar_printed()
    rep.add("dipole", {"A": block(Ad), "Ainv": block(Adi), "Theta": block(Thd),
                       "Sigma": [block(kin.sigma_dipolar(t)) for t in times],
                       "alpha": a, "beta": b,
                       "det_bracket": kin.det_A_dipolar_bracket(),
                       "det_bracket_free_value": -4 * spec.gap ** 2,
                       "theta_printed_form": printed,
                       "theta_printed_form_max_deviation": float(np.max(np.abs(printed - Thd.matrix)))})
    rep.check("dipole_det_alpha", np.linalg.det(a), 1e-8)
    rep.check("dipole_det_beta", np.linalg.det(b), 1e-8)
    rep.check("dipole_det_A_reduced_form", kin.det_A_dipolar() - np.linalg.det(Ad.matrix), 1e-8)
    for t in times:
        rep.check(f"dipole_expm_theta_A_t={t:.6g}",
                  np.max(np.abs(expm_theta(Thd, t) @ Ad.matrix - kin.sigma_dipolar(t).matrix)), 1e-8)
    ev = np.sort_complex(np.linalg.eigvals(Thd.matrix))
    rep.check("dipole_theta_eigenvalues",
              np.max(np.abs(ev - np.sort_complex(np.array([p.delta10, p.delta01])))), 1e-8)

    for z in (0j, p.theta_bar, 0.1j, p.delta10):
        res = collision.sum_rule_residuals(spec, z)
        rep.check(f"sum_rules_z={complex(z):.6g}", max(res.values()), 1e-12)


def stage_order4(kin: Kinetics, rep: RunReport) -> None:
    spec = kin.spec
    if kin.free:
        rep.add("appendix_b", {"note": "no coupling: every contribution vanishes"})
        rep.add("theta_0000_order4", kin.theta_0000_order4())
        return
    ab = collision.eval_W4_0000_at0(spec, strict=False)
    rep.add("appendix_b", ab)
    for k, v in ab.residuals.items():
        rep.check(f"appendix_b {k}", v, 1e-8)
    t4 = kin.theta_0000_order4()
    rep.add("theta_0000_order4", t4)
    rep.check("theta_0000_order4_relative", t4["relative_error"], 1e-6)
    rep.check("theta_0000_order4_nonzero", abs(t4["value"]), 0.0, mode="above")


def stage_dressing(kin: Kinetics, rep: RunReport) -> None:
    spec = kin.spec
    dd = dressing.build_chi_diag(kin)
    dp = dressing.build_chi_dipolar(kin, spec.dipolar_x)
    out = {}
    for name, ds, th in (("diag", dd, kin.build_theta_diag()), ("dipole", dp, kin.build_theta_dipolar())):
        sim = dressing.verify_similarity(th, ds)
        out[name] = {"chi": block(ds.chi), "chi_inv": block(ds.chi_inv), "phi": block(ds.phi),
                     "free_param": ds.free_param, "similarity": sim}
        for k, v in sim.items():
            rep.check(f"{name}_{k}", v, 1e-8)
        for k, v in ds.invariant_residuals().items():
            rep.check(f"{name}_{k}", v, 1e-12)
    if not kin.free:
        w11, w00 = kin.W0
        rep.check("diag_chi_determinant", np.linalg.det(dd.chi.matrix) - (w11 - w00) / (w11 + w00), 1e-12)
        ratio = dressing.eigenvector_ratios(kin.build_theta_dipolar(), [kin.poles.delta10])[0]
        rep.check("dipole_chi_matches_eigenvector",
                  ratio - dp.chi.matrix[1, 0] / dp.chi.matrix[0, 0], 1e-8)
    rep.add("dressing", out)

    D = spec.gap
    vert = {t: dressing.build_X_and_phi_vertex(spec, D, t) for t in ("bare", "causal")}
    V = math.sqrt(eval_v2(spec.form_factor, D))
    for t, v in vert.items():
        rep.check(f"vertex_{t}_resonance_equals_bare", v["Phi"]["11.0λ1"] - V, 1e-12)
    grid = [D - 1e-3, D, D + 1e-3, 0.5 * D, 2 * D]
    causal = [dressing.build_X_and_phi_vertex(spec, w, "causal", r=(0.0, 0.0, 0.7)) for w in grid]
    local = max(abs(c["Phi"]["11.0λ1"] - c["elements"]["abs_ket"]) for c in causal)
    form = max(abs(c["elements"]["abs_ket"] - c["phi_abs"] / math.sqrt(w) * np.exp(0.7j * w))
               for c, w in zip(causal, grid))
    rep.check("vertex_causal_local_form", max(local, form), 1e-12)
    jump = max(abs(causal[0]["X"]["11.0λ1"] - causal[1]["X"]["11.0λ1"]),
               abs(causal[2]["X"]["11.0λ1"] - causal[1]["X"]["11.0λ1"]))
    rep.check("vertex_causal_X_continuity", jump, 1e-2)
    rep.add("vertex", {"resonance": vert, "causal_grid": causal})


def stage_photon(kin: Kinetics, rep: RunReport) -> None:
    out = []
    base = kin.build_theta_diag()
    for w in PHOTON_FREQUENCIES:
        ket = kin.theta_absorb(w, "ket")
        bra = kin.theta_absorb(w, "bra")
        # Θ_{aa.b̄bλ} = −conj Θ_{aa.bλb̄}
        mirror = max(abs(bra["Theta"][f"{a}.{1 - b}{b}λ"] + ket["Theta"][f"{a}.{b}λ{1 - b}"].conjugate())
                     for a in ("11", "00") for b in (0, 1))
        rep.check(f"photon_mirror_w={w:g}", mirror, 1e-12)
        rep.check(f"photon_split_w={w:g}", max(ket["split_residual"], bra["split_residual"]), 1e-6)
        out.append({"omega_lambda": w, "ket": {k: block(v) for k, v in ket.items() if k != "split_residual"},
                    "bra": {k: block(v) for k, v in bra.items() if k != "split_residual"},
                    "passive_left": block(theta_passive(base, w, "left")),
                    "passive_right": block(theta_passive(base, w, "right"))})
    rep.add("photon", out)


def stage_oracle_checks(spec: ModelSpec, rep: RunReport, n_modes=None, n_max=None) -> None:
    """Cheap oracle invariants: hermiticity, unitarity on a short run, resolvent agreement."""
    o = Oracle(spec, n_modes=n_modes, n_max=n_max)
    rep.check("oracle_hermiticity", o.is_hermitian(), 0.0)
    ev = o.evolve(np.linspace(0.0, 20.0, 5))
    rep.check("oracle_unitarity", np.max(np.abs(ev.norm - 1)), 1e-10)
    rows = []
    for z in (complex(1.0, 0.3), complex(0.5, 0.5), complex(2.0, 0.4)):
        for level in (1, 0):
            a = o.resolvent_diag(level, z)
            b = greens.eval_eta_inv(spec, level, z).value
            rows.append({"level": level, "z": z, "oracle": a, "greens": b,
                         "relative": abs(a - b) / abs(b)})
    rep.check("oracle_resolvent_relative", max(r["relative"] for r in rows), 1e-3)
    rep.add("oracle_checks", {"n_modes": o.basis.n_modes, "n_max": o.basis.n_max,
                              "dimension": o.basis.dimension, "resolvent": rows,
                              "method": ev.method})


def run_series(spec: ModelSpec, n_modes=None, n_max=None, points: int = 61):
    """Oracle series on [0, 3/γ] and the matching kinetic prediction Σ11.11(t)."""
    kin = Kinetics(spec)
    T = time_scale(spec)
    times = np.linspace(0.0, 3 * T, points)
    o = Oracle(spec, n_modes=n_modes, n_max=n_max)
    ev = o.evolve(times)
    kinetic = np.array([kin.sigma_diag(t).matrix[0, 0].real for t in times])
    window = (0.2 * T, 3 * T)
    comp = compare_kinetic(times, kinetic, ev.population, window, ev.truncation_weight)
    fit = exponential_fit(times, ev.population, window) if not kin.free else None
    gamma = decay_rate(spec)
    pole_curve = np.array([abs(kin.poles.A1sq) * math.exp(-gamma * t) for t in times])
    summary = {"n_modes": o.basis.n_modes, "n_max": o.basis.n_max, "grid": o.basis.grid,
               "dimension": o.basis.dimension, "method": ev.method, "gamma": gamma,
               "fit": fit, "comparison": comp,
               "max_norm_error": float(np.max(np.abs(ev.norm - 1))),
               "pole_prediction_max_relative": float(np.max(np.abs(pole_curve - ev.population)
                                                            / ev.population))}
    return times, ev, kinetic, summary


__all__ = ["stage_poles", "stage_identities", "stage_order4", "stage_dressing", "stage_photon",
           "stage_oracle_checks", "run_series", "decay_rate", "time_scale"]
