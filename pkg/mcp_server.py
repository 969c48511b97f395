"""
MCP server for the subordinate Brownian motion toolkit.

Exposes the catalog, the density / kernel evaluators, the ratio sweeps and
the verification suites as MCP tools, so an AI client can call them.
"""

from __future__ import annotations

import time
import traceback
from typing import List, Optional

from mcp.server.fastmcp import FastMCP

import densities
import kernels
import laplace
import montecarlo
import verify
from bernstein import DEFAULT_KEYS, get_exponent, list_catalog
from config import LOG_FILE, get_logger
from densities import DensityKind, DensityMethod
from kernels import KernelKind
from reports import to_jsonable

# -----------------------------
# Logging (file only; stdout belongs to the stdio transport)
# -----------------------------
_log = get_logger("mcp")


def _mcp_log(msg: str) -> None:
    _log.info(msg)


def _log_tool_start(tool: str, payload: dict) -> float:
    _mcp_log(f"[TOOL][START] {tool} payload={payload}")
    return time.perf_counter()


def _log_tool_end(tool: str, t0: float, ok: bool, extra: str = "") -> None:
    dt = time.perf_counter() - t0
    _mcp_log(f"[TOOL][END] {tool} ok={ok} took={dt:.2f}s {extra}".rstrip())


def _tool_error(tool: str, t0: float, e: Exception, payload: dict) -> dict:
    dt = time.perf_counter() - t0
    _mcp_log(f"[TOOL][ERROR] {tool} took={dt:.2f}s payload={payload} err={repr(e)}")
    _mcp_log(traceback.format_exc())
    return {"error": str(e), "tool": tool, **payload}


def _grid(lo: float, hi: float, n: int) -> List[float]:
    return laplace.log_grid(lo, hi, n).tolist()


# -----------------------------
# Init
# -----------------------------
mcp = FastMCP("sbm-potential-theory")

_mcp_log(f"[MCP] Loaded mcp_server.py, logging to {LOG_FILE}")


# -----------------------------
# Tools
# -----------------------------
@mcp.tool()
def list_exponents() -> dict:
    payload: dict = {}
    t0 = _log_tool_start("list_exponents", payload)
    try:
        entries = [
            {
                **entry.exponent.describe(),
                "closed_form_mu": entry.closed_form_mu is not None,
                "closed_form_u": entry.closed_form_u is not None,
            }
            for entry in list_catalog(DEFAULT_KEYS)
        ]
        _log_tool_end("list_exponents", t0, ok=True, extra=f"count={len(entries)}")
        return {"exponents": entries}
    except Exception as e:
        return _tool_error("list_exponents", t0, e, payload)


@mcp.tool()
def phi_values(exponent: str = "vg", lo: float = 1e-6, hi: float = 1e6, n: int = 25) -> dict:
    payload = {"exponent": exponent, "lo": lo, "hi": hi, "n": n}
    t0 = _log_tool_start("phi_values", payload)
    try:
        exp = get_exponent(exponent)
        lam = _grid(lo, hi, n)
        rows = [{"lambda": x, "phi": float(exp.phi(x)), "phi_prime": float(exp.phi_prime(x))} for x in lam]
        _log_tool_end("phi_values", t0, ok=True)
        return to_jsonable({"exponent": exp.describe(), "rows": rows})
    except Exception as e:
        return _tool_error("phi_values", t0, e, payload)


@mcp.tool()
def density_values(
    exponent: str = "vg",
    kind: str = "mu",
    method: str = "inversion",
    lo: float = 1e-5,
    hi: float = 1.0,
    n: int = 11,
) -> dict:
    payload = {"exponent": exponent, "kind": kind, "method": method, "lo": lo, "hi": hi, "n": n}
    t0 = _log_tool_start("density_values", payload)
    try:
        density_kind = {"mu": DensityKind.LEVY_MU, "u": DensityKind.POTENTIAL_U, "tail": DensityKind.TAIL}[kind]
        curve = densities.density_curve(get_exponent(exponent), density_kind, DensityMethod(method), _grid(lo, hi, n))
        _log_tool_end("density_values", t0, ok=True)
        return to_jsonable({**payload, "t": curve.t_grid, "values": curve.values, "decreasing": curve.is_decreasing})
    except Exception as e:
        return _tool_error("density_values", t0, e, payload)


@mcp.tool()
def kernel_values(exponent: str = "vg", kind: str = "j", dim: int = 3, lo: float = 1e-4, hi: float = 1e-1, n: int = 13) -> dict:
    payload = {"exponent": exponent, "kind": kind, "dim": dim, "lo": lo, "hi": hi, "n": n}
    t0 = _log_tool_start("kernel_values", payload)
    try:
        kernel_kind = KernelKind.JUMP_J if kind == "j" else KernelKind.GREEN_G
        curve = kernels.kernel_curve(get_exponent(exponent), kernel_kind, dim, _grid(lo, hi, n))
        _log_tool_end("kernel_values", t0, ok=True)
        return to_jsonable({**payload, "r": curve.r_grid, "values": curve.values, "decreasing": curve.is_decreasing})
    except Exception as e:
        return _tool_error("kernel_values", t0, e, payload)


@mcp.tool()
def ratio_sweep(
    exponent: str = "vg",
    which: str = "jump",
    dim: int = 3,
    lo: float = 1e-4,
    hi: float = 1e-1,
    n: int = 13,
    alpha2_form: str = "derivative",
) -> dict:
    """which: jump | green | levy | potential."""
    payload = {"exponent": exponent, "which": which, "dim": dim, "lo": lo, "hi": hi, "n": n}
    t0 = _log_tool_start("ratio_sweep", payload)
    try:
        exp = get_exponent(exponent)
        grid = _grid(lo, hi, n)
        if which == "jump":
            sweep = kernels.sweep_jump_kernel(exp, dim, grid)
        elif which == "green":
            sweep = kernels.sweep_green_kernel(exp, dim, grid, alpha2_form=alpha2_form)
        elif which == "levy":
            fn = densities.sweep_levy_density_critical if exp.alpha == 2.0 else densities.sweep_levy_density
            sweep = fn(exp, grid)
        elif which == "potential":
            sweep = densities.sweep_potential_density(exp, grid)
        else:
            raise ValueError(f"unknown sweep {which!r}; choose jump, green, levy or potential")
        _log_tool_end("ratio_sweep", t0, ok=True, extra=f"verdict={sweep.verdict.value}")
        return to_jsonable(sweep.to_dict())
    except Exception as e:
        return _tool_error("ratio_sweep", t0, e, payload)


@mcp.tool()
def small_r_integral_sweep(p: float = 2.0, a: float = 1.0, b: float = 0.5, lo: float = 1e-4, hi: float = 1e-1, n: int = 13) -> dict:
    """Pure-power weight w(t) = t^-b; the ratio should equal Γ(p+b−1)."""
    payload = {"p": p, "a": a, "b": b, "lo": lo, "hi": hi, "n": n}
    t0 = _log_tool_start("small_r_integral_sweep", payload)
    try:
        sweep = laplace.check_small_r_integral_bounds(lambda t: t ** (-b), p, a, _grid(lo, hi, n), b)
        _log_tool_end("small_r_integral_sweep", t0, ok=True, extra=f"verdict={sweep.verdict.value}")
        return to_jsonable(sweep.to_dict())
    except Exception as e:
        return _tool_error("small_r_integral_sweep", t0, e, payload)


@mcp.tool()
def laplace_identity(exponent: str = "vg", n: int = 100_000, seed: int = 0) -> dict:
    payload = {"exponent": exponent, "n": n, "seed": seed}
    t0 = _log_tool_start("laplace_identity", payload)
    try:
        result = montecarlo.laplace_identity_check(exponent, n=n, seed=seed)
        _log_tool_end("laplace_identity", t0, ok=True, extra=f"passed={result['passed']}")
        return to_jsonable(result)
    except Exception as e:
        return _tool_error("laplace_identity", t0, e, payload)


@mcp.tool()
def verify_suite(suite: str = "analytic", scale: str = "quick", out_dir: Optional[str] = None) -> dict:
    payload = {"suite": suite, "scale": scale, "out_dir": out_dir}
    t0 = _log_tool_start("verify_suite", payload)
    try:
        status, report = verify.run_verify_all(suite, out_dir, scale=scale)
        _log_tool_end("verify_suite", t0, ok=True, extra=f"exit={status}")
        return to_jsonable({"exit_status": status, **report})
    except Exception as e:
        return _tool_error("verify_suite", t0, e, payload)


# -----------------------------
# Entry point
# -----------------------------
if __name__ == "__main__":
    _mcp_log("[MCP] server starting (transport=stdio)")
    mcp.run(transport="stdio")
