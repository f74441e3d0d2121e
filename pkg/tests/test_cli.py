"""Config parsing, expression grammar, scenario runs, exit codes."""

import json

import numpy as np
import pytest

from mixtype import cli
from mixtype.errors import ConfigError


# -- expression grammar ----------------------------------------------------

def test_expression_accepts_grammar():
    out = cli.parse_expression("sin(x)^2 + cos(y)*exp(-x/2)", ("x", "y"))
    assert "^" not in out
    assert "**" in out


def test_expression_rejects_unknown_name():
    with pytest.raises(ConfigError):
        cli.parse_expression("x + q", ("x", "y"))


def test_expression_rejects_bad_character():
    with pytest.raises(ConfigError):
        cli.parse_expression("x + $y", ("x", "y"))


def test_expression_respects_context_variables():
    cli.parse_expression("1 + u/2 + p2/3", ("x", "y", "u", "p1", "p2"))
    with pytest.raises(ConfigError):
        cli.parse_expression("1 + u", ("x",))


# -- config file -----------------------------------------------------------

def test_config_defaults_and_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "# comment\n[run]\nscenario = nash-moser\n[solver]\neps = 0.1\n"
    )
    cfg = cli.parse_config(cfg_file)
    assert cfg["run"]["scenario"] == "nash-moser"
    assert cfg["solver"]["eps"] == 0.1
    assert cfg["grid"]["h"] == 1.0 / 32  # untouched default


def test_config_accepts_fractions(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("[grid]\nh = 1/64\n")
    assert cli.parse_config(cfg_file)["grid"]["h"] == 1.0 / 64


def test_config_rejects_unknown_key(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("[run]\nbogus = 1\n")
    with pytest.raises(ConfigError):
        cli.parse_config(cfg_file)


def test_config_rejects_unknown_section(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("[nope]\nx = 1\n")
    with pytest.raises(ConfigError):
        cli.parse_config(cfg_file)


def test_config_rejects_bad_value(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("[grid]\nh = tiny\n")
    with pytest.raises(ConfigError):
        cli.parse_config(cfg_file)


# -- scenarios and exit codes ------------------------------------------------

def test_missing_config_exits_2(capsys):
    assert cli.main(["--config", "/no/such/file"]) == 2


def test_composite_zero_data_writes_zero_csv(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[run]\nscenario = composite-linear\n[data]\nkind = zero\n"
    )
    code = cli.main(
        ["--config", str(cfg_file), "--out", str(tmp_path / "out")]
    )
    assert code == 0
    data = np.genfromtxt(
        tmp_path / "out" / "solution.csv", delimiter=",", names=True
    )
    vals = data["value"]
    assert np.nanmax(np.abs(vals)) <= 1e-12
    with open(tmp_path / "out" / "report.json") as fh:
        rep = json.load(fh)
    assert rep["norm_max"] <= 1e-12


def test_counterexample_reports_orientation(tmp_path):
    code = cli.main(
        ["--scenario", "counterexample", "--out", str(tmp_path / "out")]
    )
    assert code == 0
    with open(tmp_path / "out" / "report.json") as fh:
        rep = json.load(fh)
    assert rep["failure_mode"] == "orientation"


def test_counterexample_forced_march_exits_4(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[run]\nscenario = counterexample\n[solver]\nforce = true\n"
    )
    code = cli.main(
        ["--config", str(cfg_file), "--out", str(tmp_path / "out")]
    )
    assert code == 4


def test_reversed_composite_exits_3(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[run]\nscenario = composite-linear\n[coeffs]\npreset = reversed\n"
        "[data]\nkind = zero\n"
    )
    code = cli.main(
        ["--config", str(cfg_file), "--out", str(tmp_path / "out")]
    )
    assert code == 3


def test_hyperbolic_scenario_writes_energy(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[run]\nscenario = hyperbolic-only\n"
        "[coeffs]\npreset = custom\nK = -1\n"
        "[data]\nkind = expression\nf = 0\ng = 1\nphi = 1\npsi = 0\n"
    )
    code = cli.main(
        ["--config", str(cfg_file), "--out", str(tmp_path / "out")]
    )
    assert code == 0
    data = np.genfromtxt(tmp_path / "out" / "energy.csv", delimiter=",", names=True)
    assert data["E"].size > 2
    with open(tmp_path / "out" / "report.json") as fh:
        rep = json.load(fh)
    assert rep["energy_ratio"] <= 1.0 + 1e-12


def test_unstable_cfl_exits_4(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[run]\nscenario = hyperbolic-only\n"
        "[grid]\ny1 = 4\n"
        "[coeffs]\npreset = custom\nK = -1\n"
        "[data]\nkind = expression\nf = 0\ng = 0\nphi = exp(-20*x^2)\npsi = 0\n"
        "[solver]\ncfl = 1.2\n"
    )
    code = cli.main(
        ["--config", str(cfg_file), "--out", str(tmp_path / "out")]
    )
    assert code == 4


def test_nashmoser_scenario_writes_history(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[run]\nscenario = nash-moser\n[grid]\nh = 1/32\n"
        "[solver]\neps = 0.05\nsteps = 1\n"
    )
    code = cli.main(
        ["--config", str(cfg_file), "--out", str(tmp_path / "out")]
    )
    assert code == 0
    with open(tmp_path / "out" / "report.json") as fh:
        rep = json.load(fh)
    assert len(rep["residual_history"]) == 2
    assert rep["residual_history"][1] < rep["residual_history"][0]
    assert (tmp_path / "out" / "w.csv").exists()


def test_composite_convergence_artifact(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[run]\nscenario = composite-linear\n[grid]\nh = 1/32\n"
        "[solver]\nconvergence_h = 1/16, 1/32\n"
    )
    code = cli.main(
        ["--config", str(cfg_file), "--out", str(tmp_path / "out")]
    )
    assert code == 0
    data = np.genfromtxt(
        tmp_path / "out" / "convergence.csv", delimiter=",", names=True
    )
    assert data["error"][1] < data["error"][0]
