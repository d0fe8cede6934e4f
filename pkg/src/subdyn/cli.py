"""Command-line front end: ``subdyn <command> --config run.toml --out results/``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import _kernels, suite
from .dressing import build_chi_diag, build_chi_dipolar, verify_similarity
from .errors import ConfigError, SubdynError
from .model import ModelSpec, load_config, spec_to_dict
from .report import RunReport, block, write_series
from .subdyn import Kinetics

COMMANDS = ("poles", "kinetic", "dress", "oracle", "verify", "evolve")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subdyn", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="TOML file with [atom], [coupling], [numerics]")
    ap.add_argument("--out", default="results", help="output directory (default: results)")
    ap.add_argument("--sector", choices=("diag", "dipole", "photon"), default=None,
                    help="restrict kinetic/dress output to one sector")
    ap.add_argument("--nmax", type=int, default=None, help="oracle photon-number cap")
    ap.add_argument("--modes", type=int, default=None, help="oracle mode count")
    return ap


def _kinetic(kin: Kinetics, rep: RunReport, sector) -> None:
    out = {}
    if sector in (None, "diag"):
        out["diag"] = {"A": block(kin.build_A_diag()), "Ainv": block(kin.invert_A_diag()),
                       "Theta": block(kin.build_theta_diag())}
    if sector in (None, "dipole"):
        out["dipole"] = {"A": block(kin.build_A_dipolar()), "Ainv": block(kin.invert_A_dipolar()),
                         "Theta": block(kin.build_theta_dipolar())}
    rep.add("kinetic", out)
    if sector in (None, "photon"):
        suite.stage_photon(kin, rep)


def _dress(kin: Kinetics, rep: RunReport, sector) -> None:
    if sector == "photon":
        suite.stage_dressing(kin, rep)
        rep.sections.pop("dressing", None)
        return
    out = {}
    pairs = []
    if sector in (None, "diag"):
        pairs.append(("diag", build_chi_diag(kin), kin.build_theta_diag()))
    if sector in (None, "dipole"):
        pairs.append(("dipole", build_chi_dipolar(kin, kin.spec.dipolar_x), kin.build_theta_dipolar()))
    for name, ds, th in pairs:
        out[name] = {"chi": block(ds.chi), "chi_inv": block(ds.chi_inv), "Phi": block(ds.phi),
                     "free_param": ds.free_param}
        for k, v in verify_similarity(th, ds).items():
            rep.check(f"{name}_{k}", v, 1e-8)
    rep.add("dressing", out)


def _series(spec, args, rep: RunReport, out: Path, with_kinetic: bool) -> None:
    times, ev, kinetic, summary = suite.run_series(spec, args.modes, args.nmax)
    rep.add("oracle", summary)
    rep.check("oracle_unitarity", summary["max_norm_error"], 1e-8)
    write_series(out / f"{args.command}.csv", times, ev.population, ev.amplitude,
                 kinetic if with_kinetic else None)


def run(args) -> int:
    out = Path(args.out)
    try:
        spec: ModelSpec = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        rep = RunReport(args.command, {"path": str(args.config)})
        rep.add("error", {"type": "ConfigError", "message": str(exc),
                          "violations": [list(v) for v in exc.violations]})
        rep.write(out / f"{args.command}.json")
        return exc.exit_code
    rep = RunReport(args.command, spec_to_dict(spec))
    rep.add("backend", _kernels.BACKEND)
    kin = Kinetics(spec)
    code = 0
    try:
        if args.command == "poles":
            suite.stage_poles(kin, rep)
        elif args.command == "kinetic":
            _kinetic(kin, rep, args.sector)
        elif args.command == "dress":
            _dress(kin, rep, args.sector)
        elif args.command in ("oracle", "evolve"):
            _series(spec, args, rep, out, args.command == "evolve")
        else:
            suite.stage_poles(kin, rep)
            suite.stage_identities(kin, rep)
            suite.stage_order4(kin, rep)
            suite.stage_dressing(kin, rep)
            suite.stage_photon(kin, rep)
            suite.stage_oracle_checks(spec, rep, n_modes=args.modes or 40, n_max=args.nmax or 2)
    except SubdynError as exc:
        rep.add("error", {"type": type(exc).__name__, "message": str(exc)})
        code = exc.exit_code
        print(f"error: {exc}", file=sys.stderr)
    path = rep.write(out / f"{args.command}.json")
    if code == 0 and not rep.passed:
        code = 4
        print("invariant failures: " + ", ".join(rep.failures()), file=sys.stderr)
    print(f"{args.command}: wrote {path} ({'ok' if code == 0 else f'exit {code}'})")
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    _kernels.configure_threads()
    np.seterr(all="ignore")
    return run(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
