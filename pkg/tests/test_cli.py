import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from polaron_lab.cli.main import cli


@pytest.fixture
def runner():
    return CliRunner()


def _table(path):
    with open(path, newline="", encoding="utf-8") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.reader(lines))


def _invoke(runner, *args):
    return runner.invoke(cli, [str(arg) for arg in args], catch_exceptions=False)


def test_version(runner):
    result = _invoke(runner, "--version")
    assert result.exit_code == 0
    assert "0.1.0" in result.output


def test_solve_free_theory(runner, config_path, tmp_path):
    result = _invoke(runner, "solve", config_path("free_q0.cfg"), "-o", tmp_path)
    assert result.exit_code == 0, result.output
    rows = _table(tmp_path / "spectrum.csv")
    assert rows[0] == ["index", "eigenvalue", "residual", "cluster"]
    assert float(rows[1][1]) == pytest.approx(-np.sqrt(1.25), abs=1e-12)
    assert rows[1][3] == rows[2][3] == "0"
    payload = json.loads((tmp_path / "spectrum.json").read_text(encoding="utf-8"))
    assert payload["header"]["command"] == "solve"
    assert payload["model"]["dim"] == 660
    assert payload["spectrum"]["multiplicities"][0] == 2


def test_csv_echoes_the_config(runner, config_path, tmp_path):
    _invoke(runner, "solve", config_path("free_q0.cfg"), "-o", tmp_path)
    lines = (tmp_path / "spectrum.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# generated ")
    assert "# p = 0.3 0 0.4" in lines


def test_outputs_are_reproducible(runner, config_path, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    for target in (first, second):
        result = _invoke(runner, "assemble", config_path("free_q0.cfg"), "-o", target)
        assert result.exit_code == 0, result.output
    for name in ("basis.json", "hamiltonian.json"):
        a = (first / name).read_text(encoding="utf-8").splitlines()
        b = (second / name).read_text(encoding="utf-8").splitlines()
        assert a[1:] == b[1:]
    hamiltonian = json.loads((first / "hamiltonian.json").read_text(encoding="utf-8"))
    assert hamiltonian["operator"]["dim"] == 660
    assert hamiltonian["operator"]["nnz"] == len(hamiltonian["operator"]["entries"])


def test_scan_writes_all_artifacts(runner, config_path, tmp_path):
    result = _invoke(runner, "scan", config_path("free_q0.cfg"), "-o", tmp_path)
    assert result.exit_code == 0, result.output
    rows = _table(tmp_path / "scan.csv")
    assert len(rows) == 12
    for row in rows[1:]:
        p = np.array([float(value) for value in row[:3]])
        assert float(row[6]) == pytest.approx(-np.sqrt(p @ p + 1.0), abs=1e-12)
    assert (tmp_path / "scan.svg").read_text(encoding="utf-8").lstrip().startswith("<?xml")


def test_check_with_no_selection(runner, config_path, tmp_path):
    result = _invoke(runner, "check", config_path("desk_d2.cfg"), "--which", "", "-o", tmp_path)
    assert result.exit_code == 0
    assert "no checks selected" in result.output
    assert not (tmp_path / "check.json").exists()


def test_check_rejects_unknown_names(runner, config_path, tmp_path):
    result = runner.invoke(cli, ["check", str(config_path("desk_d2.cfg")), "--which", "bogus", "-o", str(tmp_path)])
    assert result.exit_code == 2


def test_check_subset(runner, config_path, tmp_path):
    result = _invoke(
        runner, "check", config_path("desk_d2.cfg"), "--which", "mass_reflection,gauge_equivalence", "-o", tmp_path
    )
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "check.json").read_text(encoding="utf-8"))
    assert payload["summary"]["passed"]
    assert [check["name"] for check in payload["checks"]] == ["mass_reflection", "gauge_equivalence"]
    rows = _table(tmp_path / "check.csv")
    assert rows[0] == ["name", "status", "worst_slack", "tolerance", "anchor"]
    assert {row[1] for row in rows[1:]} == {"pass"}


def test_bad_config_exits_non_zero(runner, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("q = 0.3\nmomentum = 1 2 3\n", encoding="utf-8")
    result = runner.invoke(cli, ["solve", str(bad), "-o", str(tmp_path / "out")])
    assert result.exit_code != 0
    assert "momentum" in result.output


def test_missing_config_exits_non_zero(runner, tmp_path):
    result = runner.invoke(cli, ["solve", str(tmp_path / "absent.cfg")])
    assert result.exit_code != 0


def test_budget_error_becomes_a_click_error(runner, tmp_path):
    config = tmp_path / "large.cfg"
    config.write_text("grid_n_radial = 2\ngrid_n_polar = 3\ngrid_n_azimuthal = 8\nn_max = 4\n", encoding="utf-8")
    result = runner.invoke(cli, ["assemble", str(config), "-o", str(tmp_path / "out")])
    assert result.exit_code == 1
    assert "budget" in result.output


def test_sectors(runner, config_path, tmp_path):
    result = _invoke(runner, "sectors", config_path("desk_d2.cfg"), "-o", tmp_path)
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "sectors.json").read_text(encoding="utf-8"))
    assert payload["rotation_order"] == 4
    assert sum(dim for _, dim in payload["dimensions"]) == 660
    assert payload["kramers_pairing"]["status"] == "pass"
    rows = _table(tmp_path / "sectors.csv")
    assert len(rows) == 661


def test_dispersion_and_ir(runner, config_path, tmp_path):
    result = _invoke(runner, "dispersion", config_path("desk_d2.cfg"), "-o", tmp_path)
    assert result.exit_code == 0, result.output
    assert len(_table(tmp_path / "dispersion.csv")) == 5
    assert (tmp_path / "dispersion.svg").exists()

    result = _invoke(runner, "ir", config_path("desk_d2.cfg"), "-o", tmp_path)
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "ir.json").read_text(encoding="utf-8"))
    assert report["q"] == 0.3
    assert report["value"] == pytest.approx(0.09 * report["unit_value"])


@pytest.mark.slow
def test_all_checks_pass_on_d2(runner, config_path, tmp_path):
    result = _invoke(runner, "check", config_path("desk_d2.cfg"), "-o", tmp_path)
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "check.json").read_text(encoding="utf-8"))
    assert payload["summary"]["failed"] == []
    statuses = payload["summary"]["statuses"]
    assert statuses["oracle_agreement"] == "pass"
    assert statuses["kramers_pairing"] == "pass"
    assert statuses["dispersion_p0"] != "fail"


@pytest.mark.slow
def test_d1_checks(runner, config_path, tmp_path):
    result = _invoke(runner, "check", config_path("desk_d1.cfg"), "-o", tmp_path)
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "check.json").read_text(encoding="utf-8"))
    statuses = payload["summary"]["statuses"]
    assert statuses["kramers_pairing"] == "pass"
    assert statuses["gauge_equivalence"] == "pass"
