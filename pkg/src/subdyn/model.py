"""Physical model: a two-level atom coupled to a scalar field, plus numerical controls.

Energies are dimensionless (hbar = 1) with omega1 - omega0 of order one.
Every continuum integral runs over [0, quadrature.omega_cut]; the oracle
mode grid spans the same interval so both sides discretize the same model.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

FAMILIES = ("exponential-ohmic",)


@dataclass(frozen=True)
class FormFactor:
    family: str = "exponential-ohmic"
    g2: float = 1e-3
    cutoff_Omega: float = 10.0


@dataclass(frozen=True)
class QuadratureSpec:
    limit: int = 200
    epsabs: float = 1e-15
    epsrel: float = 1e-12
    omega_cut: float = 20.0


@dataclass(frozen=True)
class SolverSpec:
    maxiter: int = 60
    tol: float = 1e-12
    damping: float = 1.0


@dataclass(frozen=True)
class OracleSpec:
    n_modes: int = 200
    omega_max: float = 20.0
    n_max: int = 2
    dense_cap: int = 4000
    basis_cap: int = 200_000
    grid: str = "uniform"
    resonance_width: float = 0.06


@dataclass(frozen=True)
class ModelSpec:
    omega1: float = 1.0
    omega0: float = 0.0
    form_factor: FormFactor = field(default_factory=FormFactor)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    pole_solver: SolverSpec = field(default_factory=SolverSpec)
    epsilon_limit: tuple = (1e-3, 1e-4, 1e-5)
    include_order4: bool = True
    dipolar_x: Any = "auto"
    oracle: OracleSpec = field(default_factory=OracleSpec)

    @property
    def gap(self) -> float:
        return self.omega1 - self.omega0

    def with_coupling(self, g2: float) -> "ModelSpec":
        return replace(self, form_factor=replace(self.form_factor, g2=g2))

    def with_oracle(self, **kw) -> "ModelSpec":
        return replace(self, oracle=replace(self.oracle, **kw))


@dataclass
class ValidationReport:
    violations: list

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return "; ".join(f"{f}: {rule}" for f, rule in self.violations)


def validate(spec: ModelSpec) -> ModelSpec | ValidationReport:
    """Return ``spec`` itself when every invariant holds, else a report."""
    bad = []

    def need(ok, name, rule):
        try:
            ok = bool(ok)
        except Exception:
            ok = False
        if not ok:
            bad.append((name, rule))

    ff, q, s, o = spec.form_factor, spec.quadrature, spec.pole_solver, spec.oracle
    finite = all(_finite(x) for x in (spec.omega1, spec.omega0, ff.g2, ff.cutoff_Omega))
    need(finite, "atom/coupling", "all energies finite")
    need(spec.omega1 > spec.omega0, "omega1", "omega1 > omega0")
    need(ff.family in FAMILIES, "family", f"family one of {FAMILIES}")
    need(ff.g2 >= 0, "g2", "v² nonnegative")
    need(ff.cutoff_Omega > 0, "cutoff_Omega", "cutoff_Omega > 0")
    need(q.epsabs > 0 and q.epsrel > 0, "quadrature", "tolerances > 0")
    need(isinstance(q.limit, int) and q.limit > 0, "quad_limit", "panel count > 0")
    need(q.omega_cut > 10 * (spec.omega1 - spec.omega0), "omega_cut",
         "cutoff exceeds 10·(omega1−omega0)")
    need(s.tol > 0, "pole_tol", "tolerance > 0")
    need(isinstance(s.maxiter, int) and s.maxiter > 0, "pole_maxiter", "max iterations > 0")
    need(0 < s.damping <= 1, "pole_damping", "damping in (0, 1]")
    need(len(spec.epsilon_limit) >= 2 and all(e > 0 for e in spec.epsilon_limit),
         "epsilon_limit", "at least two positive offsets")
    x = spec.dipolar_x
    need(x == "auto" or (isinstance(x, (int, float)) and x > 0), "dipolar_x", "'auto' or x > 0")
    need(o.n_modes >= 2, "n_modes", "n_modes >= 2")
    need(o.n_max >= 1, "n_max", "n_max >= 1")
    need(o.omega_max > 0, "omega_max", "omega_max > 0")
    need(o.grid in ("uniform", "resonant"), "grid", "grid is 'uniform' or 'resonant'")
    need(o.resonance_width > 0, "resonance_width", "resonance_width > 0")
    return ValidationReport(bad) if bad else spec


def ensure_valid(spec: ModelSpec) -> ModelSpec:
    out = validate(spec)
    if isinstance(out, ValidationReport):
        raise ConfigError(f"invalid model: {out}", out.violations)
    return out


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


# --- form factor ---------------------------------------------------------

def eval_v2(ff: FormFactor, omega):
    """v²(ω) = g2·ω·exp(−ω/Ω) on ω > 0, zero elsewhere. Accepts scalars or arrays."""
    w = np.asarray(omega, dtype=float)
    out = np.where(w > 0, ff.g2 * w * np.exp(-np.clip(w, 0, None) / ff.cutoff_Omega), 0.0)
    return float(out) if out.ndim == 0 else out


def v2_holo(ff: FormFactor, u):
    """Holomorphic extension of the family rule, used for continuation terms."""
    return ff.g2 * u * np.exp(-u / ff.cutoff_Omega)


def v2_prime(ff: FormFactor, omega: float) -> float:
    return ff.g2 * math.exp(-omega / ff.cutoff_Omega) * (1.0 - omega / ff.cutoff_Omega)


# --- config file ---------------------------------------------------------

_ATOM = {"omega1": float, "omega0": float}
_COUPLING = {"family": str, "g2": float, "cutoff_Omega": float}
_NUMERICS = {
    "quad_limit": ("quadrature", "limit", int),
    "quad_epsabs": ("quadrature", "epsabs", float),
    "quad_epsrel": ("quadrature", "epsrel", float),
    "omega_cut": ("quadrature", "omega_cut", float),
    "pole_maxiter": ("pole_solver", "maxiter", int),
    "pole_tol": ("pole_solver", "tol", float),
    "pole_damping": ("pole_solver", "damping", float),
    "epsilon_limit": (None, "epsilon_limit", tuple),
    "include_order4": (None, "include_order4", bool),
    "dipolar_x": (None, "dipolar_x", None),
    "n_modes": ("oracle", "n_modes", int),
    "omega_max": ("oracle", "omega_max", float),
    "n_max": ("oracle", "n_max", int),
    "dense_cap": ("oracle", "dense_cap", int),
    "basis_cap": ("oracle", "basis_cap", int),
    "grid": ("oracle", "grid", str),
    "resonance_width": ("oracle", "resonance_width", float),
}


def spec_from_dict(data: dict) -> ModelSpec:
    """Build a spec from parsed [atom]/[coupling]/[numerics] tables. Unknown keys are rejected."""
    bad = []
    for sec in data:
        if sec not in ("atom", "coupling", "numerics"):
            bad.append((sec, "unknown section"))
    atom, coup, num = (data.get(k, {}) for k in ("atom", "coupling", "numerics"))
    for sec, tbl, allowed in (("atom", atom, _ATOM), ("coupling", coup, _COUPLING),
                              ("numerics", num, _NUMERICS)):
        if not isinstance(tbl, dict):
            bad.append((sec, "must be a table"))
            continue
        bad += [(f"{sec}.{k}", "unknown key") for k in tbl if k not in allowed]
    if bad:
        raise ConfigError("config rejected: " + "; ".join(f"{a}: {b}" for a, b in bad), bad)

    try:
        ff = FormFactor(**{k: _COUPLING[k](v) for k, v in coup.items()})
        parts = {"quadrature": {}, "pole_solver": {}, "oracle": {}}
        top = {k: _ATOM[k](v) for k, v in atom.items()}
        for k, v in num.items():
            group, name, typ = _NUMERICS[k]
            if typ is tuple:
                v = tuple(float(e) for e in v)
            elif typ is not None:
                if typ is int and (isinstance(v, bool) or not isinstance(v, int)):
                    raise TypeError(f"{k} must be an integer")
                if typ is bool and not isinstance(v, bool):
                    raise TypeError(f"{k} must be true/false")
                v = typ(v)
            if group is None:
                top[name] = v
            else:
                parts[group][name] = v
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config rejected: {exc}", [("config", str(exc))]) from exc
    spec = ModelSpec(
        form_factor=ff,
        quadrature=QuadratureSpec(**parts["quadrature"]),
        pole_solver=SolverSpec(**parts["pole_solver"]),
        oracle=OracleSpec(**parts["oracle"]),
        **top,
    )
    return ensure_valid(spec)


def load_config(path: str | Path) -> ModelSpec:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", [("config", str(exc))]) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}", [("config", str(exc))]) from exc
    return spec_from_dict(data)


def spec_to_dict(spec: ModelSpec) -> dict:
    """Flat echo of the spec for reports."""
    d = asdict(spec)
    d["epsilon_limit"] = list(spec.epsilon_limit)
    return d


__all__ = [
    "FormFactor", "QuadratureSpec", "SolverSpec", "OracleSpec", "ModelSpec",
    "ValidationReport", "validate", "ensure_valid", "eval_v2", "v2_holo", "v2_prime",
    "load_config", "spec_from_dict", "spec_to_dict",
]
