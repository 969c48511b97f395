import pytest

import mcp_server
from bernstein import DEFAULT_KEYS


def test_list_exponents_covers_the_catalog():
    out = mcp_server.list_exponents()
    assert [e["key"] for e in out["exponents"]] == list(DEFAULT_KEYS)


def test_phi_values_rows():
    out = mcp_server.phi_values("stable(1)", lo=1.0, hi=100.0, n=3)
    assert [row["phi"] for row in out["rows"]] == pytest.approx([1.0, 10**0.5, 10.0])


def test_tool_errors_are_returned_not_raised():
    out = mcp_server.phi_values("nope")
    assert out["tool"] == "phi_values"
    assert "unknown catalog key" in out["error"]
    out = mcp_server.ratio_sweep("vg", which="other")
    assert out["tool"] == "ratio_sweep"


def test_small_r_integral_sweep_tool():
    out = mcp_server.small_r_integral_sweep(p=2.0, a=2.0, b=0.5, lo=1e-3, hi=1e-1, n=5)
    assert out["verdict"] == "bounded"
    assert out["ratios"] == pytest.approx([out["notes"]["gamma_p_b_1"]] * 5, rel=1e-8)


def test_closed_form_density_tool():
    out = mcp_server.density_values("vg", kind="mu", method="closed_form", lo=0.1, hi=1.0, n=2)
    assert out["decreasing"]
    assert len(out["values"]) == 2
