import json
import math

import numpy as np
import pytest

from errors import DomainError
from reports import PlotSpec, RunManifest, emit_plot, format_value, read_csv_columns, to_jsonable, write_csv, write_json


def test_format_value():
    assert format_value(True) == "true"
    assert format_value(np.int64(7)) == "7"
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value("vg") == "vg"


def test_csv_round_trip(tmp_path):
    path = write_csv(tmp_path / "a" / "t.csv", ("r", "ratio"), [(0.1, 2.0), (0.2, 3.0)])
    assert path.read_text().splitlines()[0] == "r,ratio"
    cols = read_csv_columns(path)
    np.testing.assert_allclose(cols["ratio"], [2.0, 3.0])
    assert not list(tmp_path.glob("a/.*.tmp"))


def test_csv_header_and_row_width_are_checked(tmp_path):
    with pytest.raises(DomainError):
        write_csv(tmp_path / "t.csv", ("Bad Name",), [(1,)])
    with pytest.raises(DomainError):
        write_csv(tmp_path / "t.csv", ("a", "b"), [(1,)])


def test_json_handles_numpy_and_non_finite(tmp_path):
    payload = {"x": np.arange(3), "inf": math.inf, "nested": [np.float64(0.5), math.nan]}
    assert to_jsonable(payload) == {"x": [0, 1, 2], "inf": "inf", "nested": [0.5, "nan"]}
    path = write_json(tmp_path / "p.json", payload)
    assert json.loads(path.read_text())["inf"] == "inf"


def test_manifest_detects_changed_outputs(tmp_path):
    manifest = RunManifest.start({"exponent": "vg", "seed": 5}, ["sbm", "phi"])
    assert manifest.catalog_keys == ["vg"]
    assert manifest.seeds == [5]
    out = write_csv(tmp_path / "phi.csv", ("lambda",), [(1.0,)])
    manifest.add_output(out)
    manifest.add_output(out)
    assert len(manifest.outputs) == 1
    assert manifest.verify() == []
    out.write_text("lambda\n2\n")
    assert manifest.verify() == [str(out)]
    saved = json.loads(manifest.finish(tmp_path / "manifest.json").read_text())
    assert saved["command_line"] == ["sbm", "phi"]
    assert saved["finished"]


def test_plots_are_deterministic(tmp_path):
    csv_path = write_csv(tmp_path / "s.csv", ("r", "ratio", "other"), [(0.01, 1.0, 2.0), (0.1, 1.1, 1.5), (1.0, 1.2, 1.0)])
    spec = PlotSpec("r", ("ratio", "other"), logx=True, title="sweep")
    first = emit_plot(csv_path, spec, tmp_path / "one.svg").read_bytes()
    second = emit_plot(csv_path, spec, tmp_path / "two.svg").read_bytes()
    assert first == second
    assert b"ratio" in first and b"other" in first


def test_plot_input_errors(tmp_path):
    csv_path = write_csv(tmp_path / "s.csv", ("r", "ratio"), [(0.1, 1.0)])
    with pytest.raises(DomainError, match="available"):
        emit_plot(csv_path, PlotSpec("r", ("missing",)))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DomainError):
        emit_plot(empty, PlotSpec("r", ("ratio",)))
    with pytest.raises(DomainError):
        PlotSpec("r", ("ratio",), kind="bar")
