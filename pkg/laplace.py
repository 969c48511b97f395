"""
Numerical engine: quadrature on (0, ∞), inverse Laplace transforms and the
t^{-p} e^{-ar/t} w(t) integral with its small-r scaling check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable, List, Optional, Sequence

import mpmath
import numpy as np
from scipy import integrate, special

from config import Settings, get_logger, get_settings
from errors import DomainError, NumericalError
from ratios import RatioSweep, judge

log = get_logger("laplace")

_S_MAX = 700.0
_S_MIN = -745.0


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    subdivisions: int
    converged: bool


@dataclass(frozen=True)
class InversionProfile:
    method: str
    order: int
    t_grid: tuple
    values: tuple
    disagreement: tuple = ()

    def __post_init__(self) -> None:
        t = np.asarray(self.t_grid, dtype=float)
        if t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise DomainError("t_grid must be positive and strictly increasing")


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if not (lo > 0 and hi > lo and n >= 2):
        raise DomainError(f"bad log grid {lo}:{hi}:{n}")
    return np.logspace(math.log10(lo), math.log10(hi), int(n))


def _detect_peak(g: Callable[[float], float]) -> List[float]:
    s = np.linspace(-60.0, 60.0, 241)
    vals = np.array([abs(g(x)) for x in s])
    if not np.any(np.isfinite(vals) & (vals > 0)):
        return []
    vals[~np.isfinite(vals)] = 0.0
    return [float(s[int(np.argmax(vals))])]


def integrate_0_inf(
    f: Callable[[float], float],
    tol: Optional[float] = None,
    scale_points: Optional[Iterable[float]] = None,
    rtol: Optional[float] = None,
    limit: int = 200,
) -> QuadratureResult:
    """
    ∫₀^∞ f(t) dt after t = e^s, split at the given scale points (or at the
    detected peak of the transformed integrand).

    Convergence means every panel finished cleanly and the summed error
    estimate is ≤ max(tol, rtol·|value|).
    """
    tol = get_settings().quad_tol if tol is None else tol
    if tol < 1e-12:
        raise DomainError(f"tolerance must be >= 1e-12, got {tol}")
    rtol = tol if rtol is None else rtol

    def g(s: float) -> float:
        if s > _S_MAX or s < _S_MIN:
            return 0.0
        t = math.exp(s)
        return float(f(t)) * t

    if scale_points is None:
        breaks = _detect_peak(g)
    else:
        breaks = sorted(math.log(p) for p in scale_points if p > 0)
    edges = [-np.inf] + breaks + [np.inf]

    value, err, subdivisions, converged = 0.0, 0.0, 0, True
    for a, b in zip(edges[:-1], edges[1:]):
        if a == b:
            continue
        out = integrate.quad(g, a, b, epsabs=tol / len(edges), epsrel=rtol, limit=limit, full_output=1)
        value += out[0]
        err += out[1]
        subdivisions += int(out[2].get("last", 0))
        if len(out) > 3:
            converged = False

    if not math.isfinite(value):
        converged = False
    if err > max(tol, rtol * abs(value)):
        converged = False
    return QuadratureResult(float(value), float(err), subdivisions, converged)


def _invert_once(F: Callable[[Any], Any], t: float, method: str, order: Optional[int]) -> float:
    kwargs: dict = {"method": method}
    if method == "stehfest" and order is not None:
        kwargs["degree"] = int(order)
    return float(mpmath.invertlaplace(F, t, **kwargs))


def invert_laplace(
    F: Callable[[Any], Any],
    t: float,
    method: str = "stehfest",
    order: Optional[int] = None,
    rtol: Optional[float] = None,
    cross_check: bool = False,
) -> float:
    """
    f(t) with 𝓛f = F. F must accept mpmath numbers (complex ones for talbot).

    The value at `order` is compared with the value at `order - 2`; relative
    disagreement above rtol raises NumericalError carrying both estimates.
    With cross_check, a Talbot evaluation is compared the same way.
    """
    settings = get_settings()
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if method not in ("stehfest", "talbot"):
        raise DomainError(f"unknown inversion method {method!r}")
    order = settings.stehfest_degree if order is None else int(order)
    rtol = settings.inversion_rtol if rtol is None else rtol

    value = _invert_once(F, t, method, order)
    if method == "stehfest":
        check = _invert_once(F, t, method, order - 2)
        _agree(value, check, rtol, t=t, method=method, order=order)
    if cross_check:
        other = "talbot" if method == "stehfest" else "stehfest"
        check = _invert_once(F, t, other, order)
        _agree(value, check, rtol, t=t, method=f"{method}/{other}", order=order)
    return value


def _agree(value: float, check: float, rtol: float, **context: Any) -> None:
    scale = max(abs(value), abs(check), 1e-300)
    if not (math.isfinite(value) and math.isfinite(check)) or abs(value - check) > rtol * scale:
        raise NumericalError("inverse Laplace estimates disagree", estimates=(value, check), rtol=rtol, **context)


def inversion_profile(
    F: Callable[[Any], Any],
    t_grid: Sequence[float],
    method: str = "stehfest",
    order: Optional[int] = None,
) -> InversionProfile:
    settings = get_settings()
    order = settings.stehfest_degree if order is None else int(order)
    t0 = time.perf_counter()
    values, gaps = [], []
    for t in t_grid:
        v = _invert_once(F, float(t), method, order)
        w = _invert_once(F, float(t), method, order - 2) if method == "stehfest" else v
        values.append(v)
        gaps.append(abs(v - w) / max(abs(v), 1e-300))
    log.info(f"[TIMING] inversion profile n={len(values)} took {(time.perf_counter() - t0):.2f}s")
    return InversionProfile(method, order, tuple(float(t) for t in t_grid), tuple(values), tuple(gaps))


# -----------------------------
# ∫ t^{-p} e^{-ar/t} w(t) dt
# -----------------------------
def small_r_integral(w: Callable[[float], float], p: float, a: float, r: float, tol: float = 1e-10) -> float:
    """I(r) = ∫₀^∞ t^{-p} e^{-ar/t} w(t) dt, split at t = ar."""
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")
    if not (a > 0 and r > 0):
        raise DomainError("a and r must be positive")
    scale = a * r

    def integrand(t: float) -> float:
        x = scale / t
        if x > 745.0:
            return 0.0
        return t ** (-p) * math.exp(-x) * w(t)

    res = integrate_0_inf(integrand, tol=max(tol, 1e-12), scale_points=[scale], rtol=tol)
    if not res.converged:
        raise NumericalError(
            "small-r integral did not converge",
            p=p, a=a, r=r, value=res.value, abs_error=res.abs_error_estimate,
        )
    return res.value


def pure_power_value(p: float, b: float, a: float, r: float) -> float:
    """Exact I(r) for w(t) = t^{-b}: (ar)^{1-p-b} Γ(p+b-1)."""
    return (a * r) ** (1.0 - p - b) * special.gamma(p + b - 1.0)


def check_small_r_integral_bounds(
    w: Callable[[float], float],
    p: float,
    a: float,
    r_grid: Sequence[float],
    b: float,
    tol: float = 1e-10,
    settings: Optional[Settings] = None,
) -> RatioSweep:
    """Ratios I(r) / (a^{-p-b+1} r^{-p+1} w(r)) over r_grid."""
    ratios = []
    failures = []
    for r in r_grid:
        try:
            I = small_r_integral(w, p, a, float(r), tol)
            ratios.append(I / (a ** (-p - b + 1.0) * r ** (-p + 1.0) * w(float(r))))
        except NumericalError as e:
            log.warning(f"[WARN] small-r integral quadrature failed r={r}: {e}")
            failures.append(float(r))
            ratios.append(float("nan"))
    notes = {"p": p, "a": a, "b": b, "gamma_p_b_1": float(special.gamma(p + b - 1.0)), "failed_r": failures}
    return judge(r_grid, ratios, f"a^(-p-b+1) r^(-p+1) w(r) [p={p:g}, b={b:g}]", notes=notes, settings=settings)
