"""
Jump kernel j(r) and Green function g(r) of the subordinate Brownian motion as
Gaussian mixtures over μ and u, the small-r comparison sweeps, the Green
difference estimate and the shell-mass bound.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats
from scipy.interpolate import CubicSpline

from bernstein import LaplaceExponent
from config import Settings, get_logger
from densities import DensityKind, density_profile
from errors import DomainError, NumericalError, PreconditionError
from laplace import integrate_0_inf, log_grid
from ratios import RatioSweep, judge

log = get_logger("kernels")

KERNEL_RTOL = 1e-9


class KernelKind(str, Enum):
    JUMP_J = "jump_j"
    GREEN_G = "green_g"


@dataclass(frozen=True)
class RadialKernel:
    kind: KernelKind
    d: int
    r_grid: tuple
    values: tuple
    exponent_key: str
    tail_contributions: tuple = ()

    @property
    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(np.asarray(self.values)) < 0))

    def characteristic_exponent(self, exp: LaplaceExponent, xi: Any) -> Any:
        """Φ(ξ) = φ(|ξ|²) of the process this kernel belongs to."""
        return exp.characteristic_exponent(xi)

    def rows(self) -> List[Tuple[float, ...]]:
        tails = self.tail_contributions or (0.0,) * len(self.values)
        return list(zip(self.r_grid, self.values, tails))


def sphere_area(d: int) -> float:
    """|S^{d-1}|."""
    return 2.0 * math.pi ** (d / 2.0) / special.gamma(d / 2.0)


def _check_dim(kind: KernelKind, d: int) -> None:
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if kind is KernelKind.GREEN_G and d < 3:
        raise PreconditionError("the Green function needs d >= 3 (transient case)")


def _heat(d: int, r: float, t: float) -> float:
    x = r * r / (4.0 * t)
    if x > 745.0:
        return 0.0
    return (4.0 * math.pi * t) ** (-d / 2.0) * math.exp(-x)


def _gaussian_tail(d: int, r: float, T: float) -> float:
    """∫_T^∞ (4πt)^{-d/2} e^{-r²/4t} dt."""
    res = integrate_0_inf(lambda t: _heat(d, r, t) if t >= T else 0.0, tol=1e-12, scale_points=[T], rtol=1e-10)
    return res.value


def kernel_detail(exp: LaplaceExponent, kind: KernelKind, d: int, r: float) -> Tuple[float, float]:
    """(value, tail contribution beyond the density table)."""
    _check_dim(kind, d)
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    density = density_profile(exp, DensityKind.LEVY_MU if kind is KernelKind.JUMP_J else DensityKind.POTENTIAL_U)

    def integrand(t: float) -> float:
        h = _heat(d, r, t)
        return 0.0 if h == 0.0 else h * float(density(t))

    scale_points = [r * r / 4.0]
    T = density.t_max
    if math.isfinite(T):
        scale_points.append(T)
    res = integrate_0_inf(integrand, tol=1e-12, scale_points=scale_points, rtol=KERNEL_RTOL)
    if not res.converged:
        raise NumericalError(
            "kernel quadrature did not converge",
            kind=kind.value, exponent=exp.name, d=d, r=r, value=res.value, abs_error=res.abs_error_estimate,
        )
    tail = 0.0
    if math.isfinite(T) and kind is KernelKind.GREEN_G:
        tail = float(density(T)) * _gaussian_tail(d, r, T)
    return res.value, tail


def jump_kernel(exp: LaplaceExponent, d: int, r: float) -> float:
    """j(r) = ∫(4πt)^{-d/2} e^{-r²/4t} μ(t) dt."""
    return kernel_detail(exp, KernelKind.JUMP_J, d, r)[0]


def green_kernel(exp: LaplaceExponent, d: int, r: float) -> float:
    """g(r) = ∫(4πt)^{-d/2} e^{-r²/4t} u(t) dt, d ≥ 3."""
    return kernel_detail(exp, KernelKind.GREEN_G, d, r)[0]


def kernel_curve(exp: LaplaceExponent, kind: KernelKind, d: int, r_grid: Sequence[float]) -> RadialKernel:
    t0 = time.perf_counter()
    r = np.sort(np.asarray(r_grid, dtype=float))
    pairs = [kernel_detail(exp, kind, d, float(x)) for x in r]
    log.info(f"[TIMING] {kind.value} curve {exp.name} d={d} n={r.size} took {(time.perf_counter() - t0):.2f}s")
    return RadialKernel(kind, d, tuple(r.tolist()), tuple(p[0] for p in pairs), exp.name, tuple(p[1] for p in pairs))


def log_slope(r: Sequence[float], values: Sequence[float]) -> float:
    return float(np.polyfit(np.log(np.asarray(r, dtype=float)), np.log(np.asarray(values, dtype=float)), 1)[0])


class KernelProfile:
    """Log-log cubic spline of j or g on [r_lo, r_hi]; end slopes extrapolate outside."""

    def __init__(self, exponent_key: str, kind: KernelKind, d: int, r: np.ndarray, values: np.ndarray) -> None:
        self.exponent_key = exponent_key
        self.kind = kind
        self.d = d
        self.r = r
        self.values = values
        self._zero = bool(np.all(values == 0))
        if not self._zero:
            self._x = np.log(r)
            self._y = np.log(values)
            self._spline = CubicSpline(self._x, self._y)
            self._lo = (self._y[1] - self._y[0]) / (self._x[1] - self._x[0])
            self._hi = (self._y[-1] - self._y[-2]) / (self._x[-1] - self._x[-2])

    def __call__(self, r: Any) -> Any:
        arr = np.asarray(r, dtype=float)
        if self._zero:
            return np.zeros_like(arr) if arr.ndim else 0.0
        x = np.log(np.maximum(arr, 1e-300))
        y = np.where(
            x < self._x[0],
            self._y[0] + self._lo * (x - self._x[0]),
            np.where(x > self._x[-1], self._y[-1] + self._hi * (x - self._x[-1]), self._spline(np.clip(x, self._x[0], self._x[-1]))),
        )
        out = np.exp(y)
        return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def kernel_profile(
    exp: LaplaceExponent,
    kind: KernelKind,
    d: int,
    r_lo: float = 1e-4,
    r_hi: float = 10.0,
    per_decade: int = 16,
) -> KernelProfile:
    n = int(round(math.log10(r_hi / r_lo) * per_decade)) + 1
    curve = kernel_curve(exp, kind, d, log_grid(r_lo, r_hi, n))
    return KernelProfile(exp.name, kind, d, np.asarray(curve.r_grid), np.asarray(curve.values))


# -----------------------------
# Comparison sweeps
# -----------------------------
def _require_alpha(exp: LaplaceExponent) -> float:
    if exp.alpha is None:
        raise PreconditionError(f"{exp.name}: regular-variation index alpha is unknown")
    return exp.alpha


def jump_comparison(exp: LaplaceExponent, d: int, r: np.ndarray) -> Tuple[np.ndarray, str]:
    alpha = _require_alpha(exp)
    lam = r ** -2.0
    if alpha < 2.0:
        return r ** (-d - 2.0) * exp.phi_prime(lam), "r^(-d-2) phi'(r^-2)"
    return r ** (-d - 2.0) * (r * r * exp.phi(lam) - exp.phi_prime(lam)), "r^(-d-2) (r^2 phi(r^-2) - phi'(r^-2))"


def green_comparison(exp: LaplaceExponent, d: int, r: np.ndarray, alpha2_form: str = "derivative") -> Tuple[np.ndarray, str]:
    alpha = _require_alpha(exp)
    lam = r ** -2.0
    if alpha < 2.0:
        phi = exp.phi(lam)
        return r ** (-d - 2.0) * exp.phi_prime(lam) / (phi * phi), "r^(-d-2) phi'(r^-2) / phi(r^-2)^2"
    if alpha2_form == "derivative":
        return r ** (-d + 2.0) / exp.phi_prime(lam), "r^(-d+2) / phi'(r^-2)"
    if alpha2_form == "phi":
        return r ** (-float(d)) / exp.phi(lam), "r^(-d) / phi(r^-2)"
    raise DomainError(f"unknown alpha=2 form {alpha2_form!r}")


def _sweep(curve: RadialKernel, comparison: np.ndarray, label: str, settings: Optional[Settings]) -> RatioSweep:
    values = np.asarray(curve.values)
    ratios = values / comparison
    notes = {
        "kernel_log_slope": log_slope(curve.r_grid, values) if np.all(values > 0) else None,
        "relative_variation": float(ratios.max() / ratios.min() - 1.0) if np.all(ratios > 0) else None,
        "decreasing": curve.is_decreasing,
        "d": curve.d,
        "exponent": curve.exponent_key,
    }
    return judge(curve.r_grid, ratios, label, notes=notes, settings=settings)


def sweep_jump_kernel(exp: LaplaceExponent, d: int, r_grid: Sequence[float], settings: Optional[Settings] = None) -> RatioSweep:
    """j(r) against r^{-d-2}φ′(r^{-2}) (α < 2) or its α = 2 form."""
    curve = kernel_curve(exp, KernelKind.JUMP_J, d, r_grid)
    comparison, label = jump_comparison(exp, d, np.asarray(curve.r_grid))
    return _sweep(curve, comparison, label, settings)


def sweep_green_kernel(
    exp: LaplaceExponent,
    d: int,
    r_grid: Sequence[float],
    alpha2_form: str = "derivative",
    settings: Optional[Settings] = None,
) -> RatioSweep:
    """g(r) against r^{-d-2}φ′(r^{-2})/φ(r^{-2})² (α < 2) or an α = 2 form."""
    curve = kernel_curve(exp, KernelKind.GREEN_G, d, r_grid)
    comparison, label = green_comparison(exp, d, np.asarray(curve.r_grid), alpha2_form)
    return _sweep(curve, comparison, label, settings)


# -----------------------------
# Green difference
# -----------------------------
def random_admissible_pairs(d: int, r: float, n_pairs: int = 100, seed: int = 0) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Pairs with |x|, |y| ≥ r: |x| uniform in [r, 4r], |y − x| log-uniform in [r/100, 2r]."""
    rng = np.random.default_rng(seed)
    pairs: List[Tuple[np.ndarray, np.ndarray]] = []
    while len(pairs) < n_pairs:
        u = rng.standard_normal(d)
        x = u / np.linalg.norm(u) * rng.uniform(r, 4.0 * r)
        v = rng.standard_normal(d)
        y = x + v / np.linalg.norm(v) * r * 10.0 ** rng.uniform(-2.0, math.log10(2.0))
        if np.linalg.norm(y) >= r:
            pairs.append((x, y))
    return pairs


def check_green_diff(
    exp: LaplaceExponent,
    d: int,
    r: float,
    pair_list: Optional[Sequence[Tuple[Any, Any]]] = None,
    n_pairs: int = 100,
    seed: int = 0,
) -> Dict[str, Any]:
    """max over pairs of |g(|x|) − g(|y|)| / (g(r)·(1 ∧ |x−y|/r))."""
    _check_dim(KernelKind.GREEN_G, d)
    pairs = pair_list if pair_list is not None else random_admissible_pairs(d, r, n_pairs, seed)
    g_r = green_kernel(exp, d, r)
    worst = 0.0
    ratios = []
    for x, y in pairs:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
        if nx < r or ny < r:
            raise DomainError(f"pair outside the admissible region |x|, |y| >= {r}")
        dist = float(np.linalg.norm(x - y))
        if dist == 0.0:
            ratios.append(0.0)
            continue
        diff = abs(green_kernel(exp, d, nx) - green_kernel(exp, d, ny))
        ratio = diff / (g_r * min(1.0, dist / r))
        ratios.append(ratio)
        worst = max(worst, ratio)
    return {"exponent": exp.name, "d": d, "r": r, "n_pairs": len(ratios), "constant": worst, "ratios": ratios}


def green_diff_sweep(exp: LaplaceExponent, d: int, r_list: Sequence[float] = (0.02, 0.05, 0.1, 0.2), n_pairs: int = 100, seed: int = 0) -> Dict[str, Any]:
    rows = [check_green_diff(exp, d, float(r), n_pairs=n_pairs, seed=seed) for r in r_list]
    constants = [row["constant"] for row in rows]
    finite = all(math.isfinite(c) for c in constants)
    stable = finite and min(constants) > 0 and max(constants) / min(constants) <= 10.0
    return {
        "exponent": exp.name,
        "d": d,
        "r_list": list(r_list),
        "constants": constants,
        "verdict": "bounded" if stable else "failed",
    }


# -----------------------------
# Shell mass and mass away from the origin
# -----------------------------
def _cap_fraction(c: np.ndarray, d: int) -> np.ndarray:
    """Fraction of the unit sphere S^{d-1} with cos θ ≥ c."""
    c = np.clip(c, -1.0, 1.0)
    half = 0.5 * special.betainc((d - 1) / 2.0, 0.5, 1.0 - c * c)
    return np.where(c >= 0, half, 1.0 - half)


def shell_mass(exp: LaplaceExponent, d: int, z_norm: float, rho: float) -> float:
    """∫_{B_ρ(z)} j(|y|) dy for |z| > ρ by radial quadrature."""
    if not 0 < rho < z_norm:
        raise DomainError("need 0 < rho < |z|")
    if exp.family == "drift":
        return 0.0
    j = kernel_profile(exp, KernelKind.JUMP_J, d, r_lo=1e-3, r_hi=10.0)
    area = sphere_area(d)
    lo, hi = z_norm - rho, z_norm + rho

    def integrand(t: float) -> float:
        if t <= lo or t >= hi:
            return 0.0
        c = (t * t + z_norm * z_norm - rho * rho) / (2.0 * t * z_norm)
        return float(j(t)) * area * t ** (d - 1) * float(_cap_fraction(np.asarray(c), d))

    res = integrate_0_inf(integrand, tol=1e-12, scale_points=[lo, z_norm, hi], rtol=1e-8)
    return res.value


def shell_mass_bound(
    exp: LaplaceExponent,
    d: int,
    z_norms: Sequence[float] = tuple(np.linspace(0.3, 1.0, 8)),
    rho_fraction: float = 0.25,
) -> Dict[str, Any]:
    """C = max over the mesh of ∫_{B_ρ(z)} j / φ((|z| − ρ)^{-2})."""
    rows = []
    for s in z_norms:
        rho = rho_fraction * float(s)
        mass = shell_mass(exp, d, float(s), rho)
        bound = float(exp.phi((float(s) - rho) ** -2.0))
        rows.append({"z_norm": float(s), "rho": rho, "mass": mass, "phi_bound": bound, "ratio": mass / bound})
    constant = max(row["ratio"] for row in rows)
    return {"exponent": exp.name, "d": d, "rows": rows, "constant": constant, "finite": math.isfinite(constant)}


def jump_mass_away(exp: LaplaceExponent, d: int, radius: float = 1.0) -> float:
    """∫_{|x|≥R} j(|x|) dx = ∫ μ(t) P(|B_{2t}| ≥ R) dt."""
    if exp.family == "drift":
        return 0.0
    mu = density_profile(exp, DensityKind.LEVY_MU)

    def integrand(t: float) -> float:
        return float(mu(t)) * float(stats.chi2.sf(radius * radius / (2.0 * t), d))

    res = integrate_0_inf(integrand, tol=1e-12, scale_points=[radius * radius / (2.0 * d), 1.0], rtol=1e-8)
    if not res.converged:
        raise NumericalError("mass-away quadrature did not converge", exponent=exp.name, value=res.value)
    return res.value
