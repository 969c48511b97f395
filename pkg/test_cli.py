import json

import numpy as np
import pytest

import cli
from bernstein import DEFAULT_KEYS
from errors import ConfigError, DomainError


def test_parse_grid():
    np.testing.assert_allclose(cli.parse_grid("1e-3:1e-1:3"), [1e-3, 1e-2, 1e-1], rtol=1e-12)
    np.testing.assert_allclose(cli.parse_grid({"lo": 1, "hi": 100, "n": 3}), [1, 10, 100], rtol=1e-12)
    for bad in ("1:2", "a:b:c", {"lo": 1}):
        with pytest.raises(DomainError):
            cli.parse_grid(bad)


def test_config_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"exponent": "vg", "colour": "red"}))
    with pytest.raises(ConfigError, match="colour"):
        cli.load_config_file(str(path))
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        cli.load_config_file(str(path))
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        cli.load_config_file(str(path))


def test_phi_command_writes_outputs(tmp_path, capsys):
    assert cli.main(["phi", "--exponent", "stable(1)", "--grid", "1:100:3", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "phi.csv").read_text().splitlines()
    assert lines[0] == "lambda,phi,phi_prime"
    assert lines[2].split(",")[1] == "3.1622776601683795"
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert {o["path"] for o in manifest["outputs"]} == {str(tmp_path / "phi.csv"), str(tmp_path / "phi.json")}
    assert manifest["catalog_keys"] == ["stable(1)"]
    assert "wrote" in capsys.readouterr().out


def test_library_errors_exit_with_two(tmp_path, capsys):
    assert cli.main(["phi", "--exponent", "stable(7)", "--out", str(tmp_path)]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_flags_override_the_config_file(tmp_path):
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"exponent": "vg", "grid": "1:10:2", "out": str(tmp_path / "from_file")}))
    out = tmp_path / "from_flag"
    assert cli.main(["phi", "--config", str(config), "--exponent", "drift", "--out", str(out)]) == 0
    rows = (out / "phi.csv").read_text().splitlines()[1:]
    assert rows == ["1,1,1", "10,10,1"]
    assert not (tmp_path / "from_file").exists()


def test_unwritable_output_exits_with_one(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("")
    assert cli.main(["phi", "--out", str(blocker / "sub")]) == 1


def test_small_r_integral_command(tmp_path):
    assert cli.main(["small-r", "--p", "2", "--a", "2", "--b", "0.5", "--grid", "1e-3:1e-1:5", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "small_r.json").read_text())
    assert report["verdict"] == "bounded"


def test_density_closed_form_command(tmp_path):
    assert cli.main(["density", "mu", "--exponent", "vg", "--method", "closed_form", "--grid", "0.1:1:2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "density_mu_closed_form.csv").exists()


def test_plot_command(tmp_path):
    assert cli.main(["phi", "--exponent", "vg", "--grid", "1:100:5", "--out", str(tmp_path)]) == 0
    svg = tmp_path / "phi.svg"
    assert cli.main(["plot", str(tmp_path / "phi.csv"), "--x", "lambda", "--y", "phi", "--logx", "--output", str(svg), "--out", str(tmp_path / "plot")]) == 0
    assert svg.read_text().lstrip().startswith("<?xml")


@pytest.mark.slow
def test_exit_simulation_does_not_depend_on_workers(tmp_path, fresh_settings):
    fresh_settings.setenv("SBM_BLOCK_SIZE", "100")
    common = ["mc", "exit", "--exponent", "stable(1)", "--paths", "300", "--radius", "0.1", "--seed", "7"]
    assert cli.main([*common, "--workers", "1", "--out", str(tmp_path / "one")]) == 0
    assert cli.main([*common, "--workers", "2", "--out", str(tmp_path / "two")]) == 0
    assert (tmp_path / "one" / "mc_exit.csv").read_bytes() == (tmp_path / "two" / "mc_exit.csv").read_bytes()


def test_phi_list_writes_the_catalog(tmp_path):
    assert cli.main(["phi", "list", "--out", str(tmp_path)]) == 0
    catalog = json.loads((tmp_path / "catalog.json").read_text())
    assert [e["key"] for e in catalog["exponents"]] == list(DEFAULT_KEYS)
    assert (tmp_path / "catalog.csv").read_text().splitlines()[0].startswith("key,family,alpha")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["catalog_keys"] == list(DEFAULT_KEYS)


def test_regvar_index_command(tmp_path):
    assert cli.main(["regvar", "index", "--exponent", "stable(1)", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "regvar_index.json").read_text())
    assert report["fit"]["index"] == pytest.approx(-0.5, abs=1e-8)
    assert len((tmp_path / "regvar_index.csv").read_text().splitlines()) == 6


def test_regvar_dehaan_command_with_constant_ell(tmp_path):
    assert cli.main(["regvar", "dehaan", "--ell", "1", "--lam-max", "1e6", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "regvar_dehaan.json").read_text())["report"]
    assert report["increasing"]
    assert max(report["deviations"]) < 1e-9
    header = (tmp_path / "regvar_dehaan.csv").read_text().splitlines()[0]
    assert header == "lambda,l_over_ell,deviation"


def test_regvar_potter_command(tmp_path):
    assert cli.main(["regvar", "potter", "--exponent", "vg", "--delta", "0.1", "--out", str(tmp_path)]) == 0
    fit = json.loads((tmp_path / "regvar_potter.json").read_text())["fit"]
    assert fit["bounded"]
    assert fit["constant"] <= 2.0


def test_regvar_needs_an_action(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["regvar", "--out", str(tmp_path)])


def test_lemma_alias_runs_the_small_r_sweep(tmp_path):
    assert cli.main(["lemmaA1", "--p", "2", "--a", "1", "--b", "0.5", "--grid", "1e-3:1e-1:3", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "small_r.json").read_text())
    assert report["verdict"] == "bounded"


@pytest.mark.parametrize("alias,name", [("thm41", "jump"), ("thm42", "green")])
def test_sweep_aliases(tmp_path, alias, name):
    assert cli.main(["sweep", alias, "--exponent", "stable(1)", "--grid", "1e-3:1e-1:3", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / f"sweep_{name}.json").read_text())
    assert report["verdict"] in ("bounded", "converges_to_1")
