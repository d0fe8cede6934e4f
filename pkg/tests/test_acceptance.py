"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines appear in the -v log) or directly:
    python3 tests/test_acceptance.py
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

sys.path.insert(0, str(Path(__file__).resolve().parent))

from subdyn import Kinetics, ModelSpec, collision, greens  # noqa: E402
from subdyn.cli import main  # noqa: E402
from subdyn.dressing import build_chi_diag, build_chi_dipolar, build_X_and_phi_vertex, verify_similarity  # noqa: E402
from subdyn.oracle import Oracle, exponential_fit  # noqa: E402
from subdyn.subdyn import expm_theta  # noqa: E402

from conftest import CONFIGS  # noqa: E402

BASE = ModelSpec()
V2_1 = 1e-3 * math.exp(-0.1)
RESOLVENT_POINTS = [complex(x, y) for y in (0.2, 0.5) for x in (-0.5, 0.0, 0.5, 1.0, 1.5)]


def emit(request, criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    if request is None:
        print(line)
        return
    with request.config.pluginmanager.getplugin("capturemanager").global_and_fixture_disabled():
        print("\n" + line)


def _decay_check(grid):
    s = BASE.with_oracle(grid=grid)
    gamma = -2 * greens.find_pole(s, 1).location.imag
    times = np.linspace(0.0, 3 / gamma, 61)
    ev = Oracle(s, n_modes=200, n_max=2).evolve(times)
    fit = exponential_fit(times, ev.population, (0.2 / gamma, 3 / gamma))
    return gamma, fit, ev


def test_1_golden_rule(request):
    t0 = time.perf_counter()
    gamma = -2 * greens.find_pole(BASE, 1).location.imag
    golden = 2 * math.pi * V2_1
    rel_golden = abs(gamma - golden) / golden
    _, fit, ev = _decay_check("uniform")
    rel_oracle = abs(fit["rate_loglinear"] - gamma) / gamma
    elapsed = time.perf_counter() - t0
    ok = rel_golden < 0.05 and rel_oracle < 0.05 and elapsed < 120
    emit(request, 1, ok, f"γ={gamma:.6g}, 2πv²(1)={golden:.6g} (rel {rel_golden:.2%}); "
         f"uniform-grid oracle rate {fit['rate_loglinear']:.4g} (rel {rel_oracle:.1%}); {elapsed:.0f}s")
    assert rel_golden < 0.05
    assert rel_oracle < 0.05, "uniform 200-mode grid is coarser than the linewidth"


def test_1b_golden_rule_resonant_grid(request):
    t0 = time.perf_counter()
    gamma, fit, ev = _decay_check("resonant")
    rel = abs(fit["rate_loglinear"] - gamma) / gamma
    elapsed = time.perf_counter() - t0
    ok = rel < 0.05 and elapsed < 120
    emit(request, "1 (resonant grid, supplementary)", ok,
         f"oracle rate {fit['rate_loglinear']:.6g} vs γ {gamma:.6g} (rel {rel:.2%}), "
         f"truncation weight {ev.truncation_weight.max():.1e}; {elapsed:.0f}s")
    assert ok


def identity_residuals(kin):
    p = kin.poles
    out = {}
    A = kin.build_A_diag().matrix
    out["det A - |A1|^2"] = (abs(np.linalg.det(A) - p.A1sq), 1e-10)
    ts = (0.0, 100.0, 500.0)
    out["Sigma trace"] = (max(abs(kin.sigma_diag(t).matrix[:, 0].sum() - 1) for t in ts), 1e-10)
    th, thd = kin.build_theta_diag(), kin.build_theta_dipolar()
    out["Theta column sums"] = (np.max(np.abs(th.matrix.sum(axis=0))), 1e-12)
    ev = np.sort_complex(np.linalg.eigvals(th.matrix))
    out["eig Theta_diag"] = (np.max(np.abs(ev - np.sort_complex([0, p.theta_bar]))), 1e-8)
    ev = np.sort_complex(np.linalg.eigvals(thd.matrix))
    out["eig Theta_dip"] = (np.max(np.abs(ev - np.sort_complex([p.delta10, p.delta01]))), 1e-8)
    out["similarity diag"] = (max(verify_similarity(th, build_chi_diag(kin)).values()), 1e-8)
    out["similarity dip"] = (max(verify_similarity(thd, build_chi_dipolar(kin)).values()), 1e-8)
    a, b = kin.dipole_parts
    out["alpha/beta determinants"] = (max(abs(np.linalg.det(a)), abs(np.linalg.det(b)),
                                          abs(kin.det_A_dipolar() - np.linalg.det(a + b))), 1e-8)
    Ad = kin.build_A_dipolar().matrix
    out["exp(-i Theta t) A = Sigma"] = (max(
        max(np.max(np.abs(expm_theta(th, t) @ A - kin.sigma_diag(t).matrix)),
            np.max(np.abs(expm_theta(thd, t) @ Ad - kin.sigma_dipolar(t).matrix))) for t in ts), 1e-8)
    return out


def test_2_identity_suite(request):
    t0 = time.perf_counter()
    res = identity_residuals(Kinetics(BASE))
    elapsed = time.perf_counter() - t0
    bad = [k for k, (v, tol) in res.items() if not v <= tol]
    ok = not bad and elapsed < 60
    worst = max(v / tol for v, tol in res.values())
    emit(request, 2, ok, f"{len(res)} identities, worst residual/tolerance {worst:.1e}; {elapsed:.1f}s")
    assert ok, bad


def test_3_appendix_b(request):
    t0 = time.perf_counter()
    ab = collision.eval_W4_0000_at0(BASE, strict=False)
    J = quad(lambda w: 1e-3 * w * math.exp(-w / 10) / (1 + w) ** 2, 0, 20, epsabs=1e-16, epsrel=1e-13)[0]
    direct = -2j * math.pi * V2_1 * J
    rel_direct = abs(ab.total - direct) / abs(direct)
    elapsed = time.perf_counter() - t0
    worst = max(ab.residuals.values())
    ok = worst < 1e-8 and rel_direct < 1e-8 and elapsed < 30
    emit(request, 3, ok, f"worst cancellation residual {worst:.1e}, total vs direct quadrature "
         f"{rel_direct:.1e}; {elapsed:.1f}s")
    assert ok


def test_4_fourth_order_theta(request):
    t0 = time.perf_counter()
    t4 = Kinetics(BASE).theta_0000_order4()
    J = quad(lambda w: 1e-3 * w * math.exp(-w / 10) / (1 + w) ** 2, 0, 20, epsabs=1e-16, epsrel=1e-13)[0]
    pred = t4["theta2"] * J
    rel = abs(t4["value"] - pred) / abs(pred)
    elapsed = time.perf_counter() - t0
    ok = rel < 1e-6 and abs(t4["value"]) > 0 and elapsed < 10
    emit(request, 4, ok, f"Θ00.00⁽⁴⁾={t4['value'].imag:.6e}i, rel to θ̄⁽²⁾·J {rel:.1e}; {elapsed:.1f}s")
    assert ok


def _resolvent_errors(n_max, sizes=(50, 100, 200)):
    out = []
    for n in sizes:
        o = Oracle(BASE, n_modes=n, n_max=n_max)
        err = 0.0
        for level in (1, 0):
            for z in RESOLVENT_POINTS:
                ref = greens.eval_eta_inv(BASE, level, z).value
                err = max(err, abs(o.resolvent_diag(level, z) - ref) / abs(ref))
        out.append(err)
    return out


def test_5_resolvent_cross_check(request):
    errs = _resolvent_errors(1)
    ok = errs[-1] < 1e-3 and errs[0] > errs[1] > errs[2]
    emit(request, 5, ok, "N_max=1 max rel error at n=50/100/200: " + ", ".join(f"{e:.1e}" for e in errs))
    assert ok


def test_5b_resolvent_two_photons(request):
    errs = _resolvent_errors(2)
    ok = errs[-1] < 1e-3
    emit(request, "5 (N_max=2, supplementary)", ok,
         "max rel error at n=50/100/200: " + ", ".join(f"{e:.1e}" for e in errs)
         + ("" if errs[0] > errs[1] > errs[2] else " (levels off at the fourth-order floor)"))
    assert ok


def test_6_pole_structure(request):
    g2 = BASE.form_factor.g2
    gr = greens.find_pole(BASE, 0)
    p = greens.liouville_poles(BASE)
    checks = [abs(gr.location.imag) <= 1e-10 * g2,
              abs(p.theta_bar.real) <= 1e-10 * abs(p.theta_bar),
              abs(p.delta01 + p.delta10.conjugate()) <= 1e-12]
    delta = gr.location.real
    gaps = [abs(Oracle(BASE, n_modes=n, n_max=1).ground_energy() - BASE.omega0 - delta)
            for n in (50, 100, 200, 400)]
    ratios = [gaps[i] / gaps[i + 1] for i in range(3)]
    trend = all(3.0 < r < 5.0 for r in ratios) and gaps[2] < 1e-3 * g2
    ok = all(checks) and trend
    emit(request, 6, ok, f"pole checks {sum(checks)}/3; |E_ground−ω₀−δ| at n=50..400: "
         + ", ".join(f"{g:.1e}" for g in gaps) + f" (ratios {', '.join(f'{r:.2f}' for r in ratios)})")
    assert ok


def test_7_dressed_vertex(request):
    V = math.sqrt(V2_1)
    res = [abs(build_X_and_phi_vertex(BASE, 1.0, t)["Phi"]["11.0λ1"] - V) for t in ("bare", "causal")]
    form, xs = 0.0, []
    for w in (0.3, 0.9, 0.999, 1.0, 1.001, 1.1, 2.5):
        out = build_X_and_phi_vertex(BASE, w, "causal", r=(0.0, 0.0, 0.8))
        form = max(form, abs(out["Phi"]["11.0λ1"] - V / math.sqrt(w) * np.exp(0.8j * w)))
        xs.append(abs(out["X"]["11.0λ1"]))
    ok = max(res) < 1e-12 and form < 1e-12 and max(xs) < 1.0
    emit(request, 7, ok, f"resonance residual {max(res):.1e}, causal local form {form:.1e}, "
         f"max |X| across resonance {max(xs):.3g}")
    assert ok


def test_8_determinism(request, tmp_path):
    cfg = str(CONFIGS / "baseline.toml")
    codes = [main(["verify", "--config", cfg, "--out", str(tmp_path / d)]) for d in ("a", "b")]
    a = (tmp_path / "a" / "verify.json").read_bytes()
    b = (tmp_path / "b" / "verify.json").read_bytes()
    ok = codes == [0, 0] and a == b
    emit(request, 8, ok, f"two verify runs, exit codes {codes}, {len(a)} bytes, identical={a == b}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
