"""
Command-line harness.

    python cli.py phi --exponent vg --grid 1e-6:1e6:25
    python cli.py sweep jump --exponent "geo(1)" --dim 3 --grid 1e-4:1e-1:13
    python cli.py mc ks --exponent vg --paths 100000 --radii 0.01,0.1
    python cli.py verify --suite analytic

Every command writes CSV (and JSON where there is a verdict) plus a
manifest.json into --out. Library errors exit with status 2 and a
one-line message on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import densities
import kernels
import laplace
import montecarlo
import regvar
import verify
from bernstein import bernstein_grid_report, get_exponent, list_catalog
from config import get_logger, get_settings
from densities import DensityKind, DensityMethod
from errors import ConfigError, DomainError, SBMError
from kernels import KernelKind
from reports import PlotSpec, RunManifest, emit_plot, write_csv, write_json

log = get_logger("cli")

CONFIG_KEYS = {
    "exponent", "dim", "grid", "seed", "paths", "workers", "time_step",
    "jump_truncation", "radius", "radii", "tol", "out",
}

DEFAULTS: Dict[str, Any] = {
    "exponent": "vg",
    "dim": 3,
    "seed": 20240601,
    "paths": 10_000,
    "time_step": 1e-3,
    "jump_truncation": montecarlo.DEFAULT_JUMP_TRUNCATION,
    "radius": 0.1,
    "tol": 1e-10,
}

# grid defaults per command (LO:HI:N)
DEFAULT_GRIDS = {
    "phi": "1e-6:1e6:25",
    "density": "1e-5:1:11",
    "kernel": "1e-4:1e-1:13",
    "sweep": "1e-4:1e-1:13",
    "small-r": "1e-4:1e-1:13",
}

# alternative names accepted on the command line
COMMAND_ALIASES = {"lemmaA1": "small-r"}
SWEEP_ALIASES = {"thm41": "jump", "thm42": "green"}


# -----------------------------
# Config
# -----------------------------
def parse_grid(value: Any) -> np.ndarray:
    """'LO:HI:N' (or {"lo", "hi", "n"}) to a log-spaced grid."""
    if isinstance(value, dict):
        try:
            lo, hi, n = float(value["lo"]), float(value["hi"]), int(value["n"])
        except (KeyError, TypeError, ValueError):
            raise DomainError(f"grid object needs numeric lo, hi, n: {value!r}")
    else:
        parts = str(value).split(":")
        if len(parts) != 3:
            raise DomainError(f"grid must look like LO:HI:N, got {value!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise DomainError(f"grid must look like LO:HI:N, got {value!r}")
    return laplace.log_grid(lo, hi, n)


def parse_floats(value: Any) -> List[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    try:
        return [float(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"expected a comma-separated list of numbers, got {value!r}")


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}; allowed: {sorted(CONFIG_KEYS)}")
    return data


def merge_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Defaults < config file < flags."""
    merged = dict(DEFAULTS)
    merged["grid"] = DEFAULT_GRIDS.get(args.command)
    merged["out"] = str(get_settings().output_dir / args.command)
    merged.update(load_config_file(getattr(args, "config", None)))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if int(merged["dim"]) < 1:
        raise DomainError(f"dimension must be >= 1, got {merged['dim']}")
    return merged


# -----------------------------
# Output
# -----------------------------
class Outputs:
    """Collects output files into the run manifest."""

    def __init__(self, out_dir: Path, manifest: RunManifest) -> None:
        self.out_dir = out_dir
        self.manifest = manifest

    def csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        path = write_csv(self.out_dir / f"{name}.csv", header, rows)
        self.manifest.add_output(path)
        print(f"wrote {path}")
        return path

    def json(self, name: str, payload: Any) -> Path:
        path = write_json(self.out_dir / f"{name}.json", payload)
        self.manifest.add_output(path)
        print(f"wrote {path}")
        return path


def _sweep_outputs(out: Outputs, name: str, sweep: Any, x_name: str = "r") -> None:
    out.csv(name, (x_name, "ratio"), sweep.rows())
    out.json(name, sweep.to_dict())
    print(f"verdict: {sweep.verdict.value} (spread={sweep.spread:.4g}, tail slope={sweep.log_slope_tail:.4g})")


def _sim_config(cfg: Dict[str, Any], starts: Optional[Sequence[Tuple[float, ...]]] = None) -> montecarlo.SimConfig:
    d = int(cfg["dim"])
    return montecarlo.SimConfig(
        exponent_key=cfg["exponent"],
        d=d,
        time_step=float(cfg["time_step"]),
        master_seed=int(cfg["seed"]),
        n_paths=int(cfg["paths"]),
        ball_radius=float(cfg["radius"]),
        start_points=tuple(starts) if starts else ((0.0,) * d,),
        jump_truncation=float(cfg["jump_truncation"]),
        workers=cfg.get("workers"),
    )


def _starts(values: Optional[List[str]], d: int) -> List[Tuple[float, ...]]:
    points = []
    for value in values or []:
        p = tuple(parse_floats(value))
        if len(p) != d:
            raise DomainError(f"start point {value!r} is not {d}-dimensional")
        points.append(p)
    return points


# -----------------------------
# Commands
# -----------------------------
def _list_catalog(out: Outputs) -> int:
    entries = [
        {
            **entry.exponent.describe(),
            "closed_form_mu": entry.closed_form_mu is not None,
            "closed_form_u": entry.closed_form_u is not None,
            "closed_form_tail": entry.closed_form_tail is not None,
        }
        for entry in list_catalog()
    ]
    header = ("key", "family", "alpha", "drift", "kill_rate", "closed_form_mu", "closed_form_u", "closed_form_tail")
    out.csv("catalog", header, [tuple(e[h] for h in header) for e in entries])
    out.json("catalog", {"exponents": entries})
    out.manifest.catalog_keys = [e["key"] for e in entries]
    return 0


def cmd_phi(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> int:
    if args.action == "list":
        return _list_catalog(out)
    exp = get_exponent(cfg["exponent"])
    lam = parse_grid(cfg["grid"])
    phi = np.atleast_1d(exp.phi(lam))
    dphi = np.atleast_1d(exp.phi_prime(lam))
    out.csv("phi", ("lambda", "phi", "phi_prime"), list(zip(lam, phi, dphi)))
    out.json("phi", {"exponent": exp.describe(), "grid_report": bernstein_grid_report(exp, lam)})
    return 0


def _slowly_varying(name: str, exp: Any) -> Tuple[Callable[[float], float], float]:
    """ℓ and the lower limit of L(λ) = ∫ ℓ(t)/t dt."""
    if name == "1":
        return (lambda lam: 1.0), 1.0
    if name == "1/log":
        return (lambda lam: 1.0 / math.log(lam)), 2.0
    return (lambda lam: lam * float(exp.phi_prime(lam))), 0.0


def cmd_regvar(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> int:
    exp = get_exponent(cfg["exponent"])
    target = exp.phi_prime if args.function == "phi_prime" else exp.phi
    f = lambda x: float(target(x))  # noqa: E731

    if args.action == "index":
        lam_max = args.lam_max or 1e10
        fit = regvar.estimate_rv_index(f, lam_max, decades=args.decades)
        out.csv("regvar_index", ("lambda", "index"), list(zip(fit.grid, fit.sweep_indices)))
        out.json("regvar_index", {"exponent": exp.name, "function": args.function, "fit": fit.to_dict()})
        print(f"index={fit.index:.6g} alpha={fit.alpha:.6g}")
    elif args.action == "dehaan":
        ell, lower = _slowly_varying(args.ell, exp)
        report = regvar.check_de_haan(ell, args.lam_max or 1e8, lower=lower, decades=args.decades)
        rows = list(zip(report.lam_grid, report.L_over_ell, report.deviations))
        out.csv("regvar_dehaan", ("lambda", "l_over_ell", "deviation"), rows)
        out.json("regvar_dehaan", {"ell": args.ell, "exponent": exp.name if args.ell == "exponent" else None, "report": report.to_dict()})
        print(f"increasing={report.increasing} deviation_shrinking={report.deviation_shrinking}")
    else:
        fit = regvar.fit_potter_bound(f, args.delta, args.lam_min)
        out.csv("regvar_potter", ("t_decade", "max_ratio"), list(enumerate(fit.decade_maxima)))
        out.json("regvar_potter", {"exponent": exp.name, "function": args.function, "lam_min": args.lam_min, "fit": fit.to_dict()})
        print(f"constant={fit.constant:.6g} bounded={fit.bounded}")
    return 0


def cmd_density(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> int:
    exp = get_exponent(cfg["exponent"])
    kind = {"mu": DensityKind.LEVY_MU, "u": DensityKind.POTENTIAL_U, "tail": DensityKind.TAIL}[args.kind]
    method = DensityMethod(args.method)
    extra = {"extended": args.extended} if method is DensityMethod.INVERSION else {}
    curve = densities.density_curve(exp, kind, method, parse_grid(cfg["grid"]), **extra)
    name = f"density_{args.kind}_{args.method}"
    out.csv(name, ("t", "value", "method"), curve.rows())
    out.json(name, {"exponent": exp.name, "kind": kind.value, "positive": curve.is_positive, "decreasing": curve.is_decreasing})
    return 0


def cmd_kernel(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> int:
    exp = get_exponent(cfg["exponent"])
    kind = KernelKind.JUMP_J if args.kind == "j" else KernelKind.GREEN_G
    curve = kernels.kernel_curve(exp, kind, int(cfg["dim"]), parse_grid(cfg["grid"]))
    out.csv(f"kernel_{args.kind}", ("r", "value", "tail_contribution"), curve.rows())
    values = np.asarray(curve.values)
    out.json(f"kernel_{args.kind}", {
        "exponent": exp.name, "kind": kind.value, "d": curve.d, "decreasing": curve.is_decreasing,
        "log_slope": kernels.log_slope(curve.r_grid, values) if np.all(values > 0) else None,
    })
    return 0


def cmd_sweep(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> int:
    which = SWEEP_ALIASES.get(args.which, args.which)
    exp = get_exponent(cfg["exponent"])
    d = int(cfg["dim"])
    if which == "greendiff":
        radii = parse_floats(cfg["radii"]) if cfg.get("radii") else [0.02, 0.05, 0.1, 0.2]
        report = kernels.green_diff_sweep(exp, d, radii, n_pairs=args.pairs, seed=int(cfg["seed"]))
        out.csv("sweep_greendiff", ("r", "constant"), list(zip(report["r_list"], report["constants"])))
        out.json("sweep_greendiff", report)
        print(f"verdict: {report['verdict']}")
        return 0
    grid = parse_grid(cfg["grid"])
    if which == "jump":
        sweep = kernels.sweep_jump_kernel(exp, d, grid)
    elif which == "green":
        sweep = kernels.sweep_green_kernel(exp, d, grid, alpha2_form=args.alpha2_form)
    elif which == "levy":
        sweep = (densities.sweep_levy_density_critical if exp.alpha == 2.0 else densities.sweep_levy_density)(exp, grid)
    else:
        sweep = densities.sweep_potential_density(exp, grid, convention=args.convention)
    _sweep_outputs(out, f"sweep_{which}", sweep, "t" if which in ("levy", "potential") else "r")
    return 0


def _weight(name: str, b: float) -> Callable[[float], float]:
    if name == "power":
        return lambda t: t ** (-b)
    return lambda t: t ** (-b) * math.sqrt(1.0 + abs(math.log(t)))


def cmd_small_r(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> int:
    grid = parse_grid(cfg["grid"])
    sweep = laplace.check_small_r_integral_bounds(_weight(args.weight, args.b), args.p, args.a, grid, args.b, tol=float(cfg["tol"]))
    _sweep_outputs(out, "small_r", sweep)
    return 0


def _mc_subordinator(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> Dict[str, Any]:
    lams = parse_floats(args.lambdas)
    times = parse_floats(args.times)
    report = montecarlo.laplace_identity_check(
        cfg["exponent"], lams, times, n=int(cfg["paths"]), seed=int(cfg["seed"]),
        eps=float(cfg["jump_truncation"]), workers=cfg.get("workers"),
    )
    rows = [(r["lambda"], r["t"], r["empirical"], r["exact"], r["std_error"], r["z"], r["ok"]) for r in report["rows"]]
    out.csv("mc_subordinator", ("lambda", "t", "empirical", "exact", "std_error", "z", "ok"), rows)
    return report


def _mc_exit(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> Dict[str, Any]:
    sim = _sim_config(cfg, _starts(args.start, int(cfg["dim"])))
    r = sim.ball_radius
    shells = [(r, 2.0 * r), (2.0 * r, math.inf)]
    records = montecarlo.simulate_exit(sim, shells)
    rows = [
        (i, rec.exit_time, float(np.linalg.norm(rec.exit_position)) if not rec.killed else math.inf,
         rec.exited_to_shell[0], rec.overshoot, rec.killed, rec.censored)
        for i, rec in enumerate(records)
    ]
    out.csv("mc_exit", ("path", "exit_time", "exit_norm", "inner_shell", "overshoot", "killed", "censored"), rows)
    times = np.array([rec.exit_time for rec in records if not (rec.killed or rec.censored)])
    return {
        "config": sim.to_dict(),
        "n": len(records),
        "mean_exit_time": float(times.mean()) if times.size else None,
        "censored_fraction": float(np.mean([rec.censored for rec in records])),
        "inner_shell_fraction": float(np.mean([rec.exited_to_shell[0] for rec in records])),
    }


def _mc_kernel(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> Dict[str, Any]:
    sim = _sim_config(cfg, _starts(args.start, int(cfg["dim"])))
    r = sim.ball_radius
    if args.what == "green":
        estimate = montecarlo.estimate_green_ball(sim, montecarlo.BinSpec.ball(sim.d, r))
    else:
        estimate = montecarlo.estimate_poisson_kernel(sim, montecarlo.BinSpec.shell(sim.d, r, 2.0 * r))
    out.csv(f"mc_{args.what}", ("radius", "cos_theta", "value", "std_error", "volume"), estimate.rows())
    return estimate.to_dict()


def _mc_ks(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> Dict[str, Any]:
    exp = get_exponent(cfg["exponent"])
    radii = parse_floats(cfg["radii"]) if cfg.get("radii") else [0.01, 0.02, 0.05, 0.1]
    sweep = montecarlo.krylov_safonov_sweep(exp, int(cfg["dim"]), radii, _sim_config(cfg))
    rows = [(row["r"], row["p_half"], row["se_half"], row["p_quarter"], row["se_quarter"], row["rho"]) for row in sweep.notes["rows"]]
    out.csv("mc_ks", ("r", "p_half", "se_half", "p_quarter", "se_quarter", "rho"), rows)
    print(f"verdict: {sweep.verdict.value}")
    return sweep.to_dict()


def _mc_harmonic(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> Dict[str, Any]:
    exp = get_exponent(cfg["exponent"])
    radii = parse_floats(cfg["radii"]) if cfg.get("radii") else [0.05, 0.1, 0.2]
    report = montecarlo.harmonic_modulus_sweep(exp, int(cfg["dim"]), radii, _sim_config(cfg))
    out.csv("mc_harmonic", ("r", "modulus"), list(zip(report["radii"], report["M"])))
    print(f"passed={report['passed']} inconclusive={report['inconclusive']}")
    return report


MC_COMMANDS: Dict[str, Callable[[argparse.Namespace, Dict[str, Any], Outputs], Dict[str, Any]]] = {
    "subordinator": _mc_subordinator,
    "exit": _mc_exit,
    "green": _mc_kernel,
    "poisson": _mc_kernel,
    "ks": _mc_ks,
    "harmonic": _mc_harmonic,
}


def cmd_mc(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> int:
    report = MC_COMMANDS[args.what](args, cfg, out)
    out.json(f"mc_{args.what}", report)
    return 0


def cmd_plot(args: argparse.Namespace, cfg: Dict[str, Any], out: Outputs) -> int:
    spec = PlotSpec(args.x, tuple(args.y), kind=args.kind, logx=args.logx, logy=args.logy, title=args.title or "")
    target = Path(args.output) if args.output else None
    path = emit_plot(Path(args.csv), spec, target)
    out.manifest.add_output(path)
    print(f"wrote {path}")
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, Dict[str, Any], Outputs], int]] = {
    "phi": cmd_phi,
    "regvar": cmd_regvar,
    "density": cmd_density,
    "kernel": cmd_kernel,
    "sweep": cmd_sweep,
    "small-r": cmd_small_r,
    "mc": cmd_mc,
    "plot": cmd_plot,
}


# -----------------------------
# Parser
# -----------------------------
def _shared() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--exponent", help="catalog key, e.g. vg, stable(1.5), geo-iter(2,2)")
    parent.add_argument("--dim", type=int, help="space dimension d")
    parent.add_argument("--grid", help="log grid LO:HI:N")
    parent.add_argument("--seed", type=int, help="master seed")
    parent.add_argument("--paths", type=int, help="Monte Carlo paths / samples")
    parent.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
    parent.add_argument("--out", help="output directory (default $SBM_OUTPUT_DIR/<command>)")
    parent.add_argument("--config", help="JSON experiment config; flags override it")
    return parent


def build_parser() -> argparse.ArgumentParser:
    shared = _shared()
    parser = argparse.ArgumentParser(prog="sbm", description="Subordinate Brownian motion potential theory toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phi", parents=[shared], help="phi and phi' on a lambda grid; 'phi list' lists the catalog")
    p.add_argument("action", nargs="?", choices=("list",))

    p = sub.add_parser("regvar", parents=[shared], help="regular variation: index fit, de Haan check, Potter bound")
    p.add_argument("action", choices=("index", "dehaan", "potter"))
    p.add_argument("--function", choices=("phi", "phi_prime"), default="phi_prime")
    p.add_argument("--lam-max", type=float, help="largest lambda (index: 1e10, dehaan: 1e8)")
    p.add_argument("--decades", type=int, default=4)
    p.add_argument("--ell", choices=("1/log", "1", "exponent"), default="exponent", help="dehaan: slowly varying input; 'exponent' is lambda*phi'(lambda)")
    p.add_argument("--delta", type=float, default=0.1, help="potter: slack in the exponent")
    p.add_argument("--lam-min", type=float, default=1.0, help="potter: smallest lambda of the mesh")

    p = sub.add_parser("density", parents=[shared], help="Lévy / potential density or tail on a t grid")
    p.add_argument("kind", choices=("mu", "u", "tail"))
    p.add_argument("--method", choices=[m.value for m in DensityMethod], default=DensityMethod.INVERSION.value)
    p.add_argument("--extended", action="store_true", help="allow t outside the validated inversion range")

    p = sub.add_parser("kernel", parents=[shared], help="jump kernel j or Green function g on an r grid")
    p.add_argument("kind", choices=("j", "g"))

    p = sub.add_parser("sweep", parents=[shared], help="ratio sweeps against the asymptotic comparisons")
    p.add_argument("which", choices=("jump", "green", "greendiff", "levy", "potential", *SWEEP_ALIASES))
    p.add_argument("--alpha2-form", choices=("derivative", "phi"), default="derivative")
    p.add_argument("--convention", choices=("karamata", "published"), default="karamata")
    p.add_argument("--radii", help="comma-separated radii (greendiff)")
    p.add_argument("--pairs", type=int, default=100)

    p = sub.add_parser("small-r", aliases=list(COMMAND_ALIASES), parents=[shared], help="small-r integral against a^(-p-b+1) r^(-p+1) w(r)")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=0.5)
    p.add_argument("--weight", choices=("power", "log"), default="power")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("mc", parents=[shared], help="Monte Carlo experiments")
    p.add_argument("what", choices=tuple(MC_COMMANDS))
    p.add_argument("--radius", type=float, help="ball radius")
    p.add_argument("--radii", help="comma-separated radii (ks, harmonic)")
    p.add_argument("--time-step", dest="time_step", type=float)
    p.add_argument("--jump-truncation", dest="jump_truncation", type=float)
    p.add_argument("--start", action="append", help="start point x1,...,xd (repeatable)")
    p.add_argument("--lambdas", default="0.5,1,2")
    p.add_argument("--times", default="0.1,1")

    p = sub.add_parser("verify", parents=[shared], help="run a verification suite")
    p.add_argument("--suite", choices=verify.SUITES, default="analytic")
    p.add_argument("--scale", choices=verify.SCALES, default="quick")
    p.add_argument("--only", action="append", help="run only the named check (repeatable)")

    p = sub.add_parser("plot", parents=[shared], help="SVG plot of CSV columns")
    p.add_argument("csv")
    p.add_argument("--x", required=True)
    p.add_argument("--y", action="append", required=True)
    p.add_argument("--kind", choices=("line", "scatter"), default="line")
    p.add_argument("--logx", action="store_true")
    p.add_argument("--logy", action="store_true")
    p.add_argument("--title")
    p.add_argument("--output", help="SVG path (default: CSV path with .svg)")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.command = COMMAND_ALIASES.get(args.command, args.command)
    cfg = merge_config(args)
    out_dir = Path(cfg["out"])
    manifest = RunManifest.start(cfg, ["sbm", *argv])
    t0 = time.perf_counter()
    log.info(f"[CLI] {args.command} argv={argv}")

    if args.command == "verify":
        status, report = verify.run_verify_all(args.suite, out_dir, scale=args.scale, seed=int(cfg["seed"]), manifest=manifest, only=args.only)
        print(f"{args.suite}: {report['counts']} failed={report['failed']}")
        return status

    out = Outputs(out_dir, manifest)
    status = COMMANDS[args.command](args, cfg, out)
    manifest.finish(out_dir / "manifest.json")
    log.info(f"[TIMING] {args.command} took {(time.perf_counter() - t0):.2f}s")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(argv)
    except SBMError as e:
        log.error(f"[CLI] {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        log.error(f"[CLI] I/O error: {e!r}")
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
