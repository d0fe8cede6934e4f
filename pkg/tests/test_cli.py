import csv
import json
import subprocess
import sys

import pytest

from subdyn.cli import main
from subdyn.report import CSV_COLUMNS

from conftest import CONFIGS


def _run(tmp_path, *args):
    code = main(list(args) + ["--out", str(tmp_path)])
    return code


def test_verify_free_all_zero(tmp_path):
    assert _run(tmp_path, "verify", "--config", str(CONFIGS / "free.toml")) == 0
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["schema"] == 1 and rep["verdict"] is True
    below = [v["value"] for v in rep["residuals"].values() if v["mode"] == "below"]
    assert max(below) < 1e-15


def test_bad_config_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[atom]\nomega1 = 0.0\nomega0 = 1.0\n")
    assert _run(tmp_path, "poles", "--config", str(bad)) == 2
    assert "omega1" in capsys.readouterr().err
    rep = json.loads((tmp_path / "poles.json").read_text())
    assert rep["verdict"] is False and rep["error"]["type"] == "ConfigError"


@pytest.mark.parametrize("cmd,extra", [
    ("poles", []),
    ("kinetic", []),
    ("kinetic", ["--sector", "photon"]),
    ("dress", ["--sector", "dipole"]),
])
def test_commands_on_baseline(tmp_path, cmd, extra):
    assert _run(tmp_path, cmd, "--config", str(CONFIGS / "baseline.toml"), *extra) == 0
    rep = json.loads((tmp_path / f"{cmd}.json").read_text())
    assert rep["command"] == cmd and rep["verdict"] is True


def test_complex_numbers_as_pairs(tmp_path):
    _run(tmp_path, "poles", "--config", str(CONFIGS / "baseline.toml"))
    rep = json.loads((tmp_path / "poles.json").read_text())
    th = rep["poles"]["liouville"]["theta_bar"]
    assert isinstance(th, list) and len(th) == 2 and th[0] == 0.0 and th[1] < 0


def test_evolve_writes_csv(tmp_path):
    assert _run(tmp_path, "evolve", "--config", str(CONFIGS / "baseline.toml"),
                "--modes", "20", "--nmax", "1") == 0
    with open(tmp_path / "evolve.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS and len(rows) == 62
    assert float(rows[1][1]) == pytest.approx(1.0)


def test_oracle_command_without_kinetic_column(tmp_path):
    assert _run(tmp_path, "oracle", "--config", str(CONFIGS / "free.toml"),
                "--modes", "10", "--nmax", "1") == 0
    with open(tmp_path / "oracle.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[1][4] == ""


def test_resource_error_exit_3(tmp_path):
    assert _run(tmp_path, "oracle", "--config", str(CONFIGS / "free.toml"),
                "--modes", "2000", "--nmax", "2") == 3
    rep = json.loads((tmp_path / "oracle.json").read_text())
    assert rep["error"]["type"] == "ResourceError"


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "subdyn", "poles", "--config",
                          str(CONFIGS / "free.toml"), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "poles.json" in out.stdout


def test_usage_error():
    with pytest.raises(SystemExit) as ei:
        main(["frobnicate", "--config", "x.toml"])
    assert ei.value.code == 2
