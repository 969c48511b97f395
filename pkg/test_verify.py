import json

import pytest

import cli
import verify


def test_suite_composition():
    full = verify.checks_for("full")
    assert full == verify.ANALYTIC + verify.ASYMPTOTIC + verify.MONTECARLO
    assert verify.checks_for("analytic")[0] is verify.check_newtonian_green
    with pytest.raises(ValueError):
        verify.checks_for("everything")
    with pytest.raises(ValueError):
        verify.run_verify_all("analytic", scale="huge")


def test_single_analytic_check_through_the_cli(tmp_path):
    out = tmp_path / "verify"
    assert cli.main(["verify", "--suite", "analytic", "--only", "inverse_sqrt", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["checks"] == {"inverse_laplace_sqrt": "pass"}
    assert summary["failed"] == []
    assert (out / "inverse_laplace_sqrt.csv").exists()
    assert (out / "manifest.json").exists()


def test_errors_are_recorded_per_check(tmp_path, monkeypatch):
    def broken(scale, seed):
        raise RuntimeError("boom")

    broken.__name__ = "check_broken"
    monkeypatch.setattr(verify, "ANALYTIC", [broken, verify.check_newtonian_green])
    status, report = verify.run_verify_all("analytic", tmp_path)
    assert status == 1
    assert report["checks"] == {"broken": "error", "newtonian_green": "pass"}
    saved = json.loads((tmp_path / "broken.json").read_text())
    assert saved["details"]["type"] == "RuntimeError"


def test_unwritable_directory_fails_before_running(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("")
    with pytest.raises(OSError):
        verify.run_verify_all("analytic", blocker / "out")


@pytest.mark.slow
def test_analytic_suite_passes(tmp_path):
    status, report = verify.run_verify_all("analytic", tmp_path)
    assert status == 0, report["failed"]


def test_potential_convergence_records_the_applied_criterion():
    result = verify.check_potential_convergence(verify.SCALE_PRESETS["quick"], 0)
    assert result.details["criterion"] == {
        "stable(0.5)": verify.HALVING,
        "stable(1)": verify.HALVING,
        "stable(1.5)": verify.HALVING,
        "vg": verify.STRICT_DECREASE,
    }
    assert set(result.details["halved"]) == set(result.details["criterion"])
    rows = {row[0]: row for row in result.rows}
    for key in ("stable(0.5)", "stable(1)", "stable(1.5)"):
        assert rows[key][-1] == rows[key][5]
    assert len(result.header) == len(rows["vg"])
