"""JSON/CSV serialization of run results. Complex numbers become [re, im]."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

SCHEMA = 1


def jsonable(obj):
    """Recursively convert to plain JSON types with a fixed key order."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def block(b) -> dict:
    """A SectorBlock as rows/cols/matrix."""
    return {"sector": b.sector, "label": b.label, "rows": list(b.basis),
            "cols": list(b.col_basis), "matrix": jsonable(b.matrix), "meta": jsonable(b.meta)}


class RunReport:
    """Accumulates sections and residual checks; the verdict is the conjunction of checks."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.sections: dict = {"config": config}
        self.checks: dict = {}

    def add(self, name: str, payload) -> None:
        self.sections[name] = payload

    def check(self, name: str, value, tol: float, mode: str = "below") -> bool:
        """Record one residual; ``mode='below'`` passes when value ≤ tol, 'above' when value > tol."""
        v = float(abs(value)) if not isinstance(value, bool) else float(value)
        ok = (v <= tol) if mode == "below" else (v > tol)
        self.checks[name] = {"value": v, "tolerance": tol, "mode": mode, "pass": bool(ok)}
        return ok

    @property
    def passed(self) -> bool:
        return "error" not in self.sections and all(c["pass"] for c in self.checks.values())

    def failures(self) -> list:
        return [k for k, c in self.checks.items() if not c["pass"]]

    def as_dict(self) -> dict:
        out = {"schema": SCHEMA, "command": self.command}
        out.update(self.sections)
        out["residuals"] = self.checks
        out["verdict"] = self.passed
        return jsonable(out)

    def write(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(self.as_dict(), indent=2, sort_keys=True, ensure_ascii=False)
        path.write_text(text + "\n", encoding="utf-8")
        return path


CSV_COLUMNS = ["t", "population", "re_amplitude", "im_amplitude", "kinetic_prediction", "deviation"]


def write_series(path: Path, times, population, amplitude, kinetic=None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for i, t in enumerate(times):
            k = "" if kinetic is None else repr(float(kinetic[i]))
            dev = "" if kinetic is None else repr(float(kinetic[i] - population[i]))
            w.writerow([repr(float(t)), repr(float(population[i])), repr(float(amplitude[i].real)),
                        repr(float(amplitude[i].imag)), k, dev])
    return path


__all__ = ["SCHEMA", "RunReport", "jsonable", "block", "write_series", "CSV_COLUMNS"]
