"""
Lévy density μ and potential density u of a subordinator, computed from closed
forms, by numerical Laplace inversion, or from the small-t asymptotic formulas.

Transform pairs used for inversion:
  t·μ(t)  <->  φ′(λ) − γ
  ν̄(t) = μ(t, ∞)  <->  (φ(λ) − κ)/λ − γ
  u(t)  <->  1/φ(λ)
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from bernstein import CatalogEntry, LaplaceExponent, conjugate, get_entry
from config import Settings, get_logger, get_settings
from errors import DomainError, NumericalError, PreconditionError, UnsupportedError
from laplace import integrate_0_inf, invert_laplace, log_grid
from ratios import RatioSweep, judge

log = get_logger("densities")

LEVY_UPPER_CONSTANT = 1.0 / (1.0 - 2.0 * math.exp(-1.0))
# granted before the alpha = 2 Lévy density comparison runs
ALPHA2_ASSUMPTIONS = ("regular_variation", "decreasing_levy_density", "decreasing_potential_density", "alpha2_slow_variation")


class DensityKind(str, Enum):
    LEVY_MU = "levy_mu"
    POTENTIAL_U = "potential_u"
    TAIL = "tail"


class DensityMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    INVERSION = "inversion"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class DensityCurve:
    kind: DensityKind
    method: DensityMethod
    t_grid: tuple
    values: tuple
    exponent_key: str

    def __post_init__(self) -> None:
        t = np.asarray(self.t_grid, dtype=float)
        if t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise DomainError("t_grid must be positive and strictly increasing")
        if len(self.values) != t.size:
            raise DomainError("values and t_grid differ in length")

    @property
    def is_positive(self) -> bool:
        return bool(np.all(np.asarray(self.values) > 0))

    @property
    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(np.asarray(self.values)) < 0))

    def rows(self):
        return [(t, v, self.method.value) for t, v in zip(self.t_grid, self.values)]


def _entry(exp: LaplaceExponent) -> Optional[CatalogEntry]:
    if not exp.key:
        return None
    try:
        entry = get_entry(exp.key)
    except DomainError:
        return None
    return entry if entry.exponent is exp else None


def _t_array(t: Any) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if arr.size == 0 or not np.all(arr > 0):
        raise DomainError(f"t must be positive, got {t!r}")
    return arr


def _check_validated(t: float, extended: bool, settings: Settings) -> None:
    if extended:
        return
    if not settings.inversion_t_min <= t <= settings.inversion_t_max:
        raise DomainError(
            f"t={t:g} outside the validated inversion range "
            f"[{settings.inversion_t_min:g}, {settings.inversion_t_max:g}]; use the asymptotic formula"
        )


# -----------------------------
# Closed forms
# -----------------------------
def mu_closed_form(key: str, t: Any) -> Any:
    entry = get_entry(key)
    if entry.closed_form_mu is None:
        raise UnsupportedError(f"no closed-form Lévy density for {key}")
    out = np.asarray(entry.closed_form_mu(t), dtype=float)
    return float(out) if out.ndim == 0 else out


def u_closed_form(key: str, t: Any) -> Any:
    entry = get_entry(key)
    if entry.closed_form_u is None:
        raise UnsupportedError(f"no closed-form potential density for {key}")
    out = np.asarray(entry.closed_form_u(t), dtype=float)
    return float(out) if out.ndim == 0 else out


# -----------------------------
# Inversion
# -----------------------------
def mu_numeric(exp: LaplaceExponent, t: float, extended: bool = False) -> float:
    """μ(t) = L⁻¹[φ′ − γ](t) / t."""
    settings = get_settings()
    _check_validated(t, extended, settings)
    gamma = exp.drift
    return invert_laplace(lambda p: exp.phi_prime_mp(p) - gamma, float(t)) / t


def tail_numeric(exp: LaplaceExponent, t: float, extended: bool = False) -> float:
    """ν̄(t) = μ(t, ∞) = L⁻¹[(φ − κ)/λ − γ](t)."""
    settings = get_settings()
    _check_validated(t, extended, settings)
    kappa, gamma = exp.kill_rate or 0.0, exp.drift
    return invert_laplace(lambda p: (exp.phi_mp(p) - kappa) / p - gamma, float(t))


def u_numeric(exp: LaplaceExponent, t: float, cross_check: bool = False, extended: bool = False) -> float:
    """u(t) = L⁻¹[1/φ](t)."""
    settings = get_settings()
    _check_validated(t, extended, settings)
    value = invert_laplace(lambda p: 1 / exp.phi_mp(p), float(t), cross_check=cross_check)
    if not value > 0:
        raise NumericalError("potential density inversion returned a non-positive value", t=t, value=value)
    return value


def levy_density(exp: LaplaceExponent, t: Any, extended: bool = False) -> Any:
    """μ(t): closed form when the catalog has one, inversion otherwise."""
    entry = _entry(exp)
    if entry is not None and entry.closed_form_mu is not None:
        return mu_closed_form(entry.key, t)
    arr = _t_array(t)
    out = np.array([mu_numeric(exp, float(x), extended) for x in arr.ravel()]).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def potential_density(exp: LaplaceExponent, t: Any, extended: bool = False) -> Any:
    entry = _entry(exp)
    if entry is not None and entry.closed_form_u is not None:
        return u_closed_form(entry.key, t)
    arr = _t_array(t)
    out = np.array([u_numeric(exp, float(x), extended=extended) for x in arr.ravel()]).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def tail_mass(exp: LaplaceExponent, t: Any, extended: bool = False) -> Any:
    entry = _entry(exp)
    if entry is not None and entry.closed_form_tail is not None:
        out = np.asarray(entry.closed_form_tail(t), dtype=float)
        return float(out) if out.ndim == 0 else out
    arr = _t_array(t)
    out = np.array([tail_numeric(exp, float(x), extended) for x in arr.ravel()]).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# -----------------------------
# Asymptotic formulas
# -----------------------------
def _require_alpha(exp: LaplaceExponent) -> float:
    if exp.alpha is None:
        raise PreconditionError(f"{exp.name}: regular-variation index alpha is unknown")
    return exp.alpha


def mu_asymptotic(exp: LaplaceExponent, t: Any) -> Any:
    """t⁻²φ′(1/t) for α < 2, t⁻²(tφ(1/t) − φ′(1/t)) for α = 2."""
    alpha = _require_alpha(exp)
    arr = _t_array(t)
    s = 1.0 / arr
    if alpha < 2.0:
        out = s * s * exp.phi_prime(s)
    else:
        out = s * s * (arr * exp.phi(s) - exp.phi_prime(s))
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def u_asymptotic_constant(alpha: float, convention: str = "karamata") -> float:
    if convention == "karamata":
        return float(1.0 / special.gamma(1.0 + alpha / 2.0))
    if convention == "published":
        return float(1.0 / special.gamma(1.0 - alpha / 2.0))
    raise DomainError(f"unknown convention {convention!r}")


def u_asymptotic(exp: LaplaceExponent, t: Any, convention: str = "karamata", alpha2_form: str = "derivative") -> Any:
    """
    α < 2: c·t⁻²φ′(1/t)/φ(1/t)², with c = 1/Γ(1+α/2) ("karamata", exact for
    stable exponents) or c = 1/Γ(1−α/2) ("published").
    α = 2: 1/φ′(1/t) ("derivative") or 1/(tφ(1/t)) ("phi").
    """
    alpha = _require_alpha(exp)
    arr = _t_array(t)
    s = 1.0 / arr
    if alpha < 2.0:
        phi = np.asarray(exp.phi(s))
        out = u_asymptotic_constant(alpha, convention) * s * s * exp.phi_prime(s) / (phi * phi)
    elif alpha2_form == "derivative":
        out = 1.0 / np.asarray(exp.phi_prime(s))
    elif alpha2_form == "phi":
        out = 1.0 / (arr * np.asarray(exp.phi(s)))
    else:
        raise DomainError(f"unknown alpha=2 form {alpha2_form!r}")
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def density_curve(exp: LaplaceExponent, kind: DensityKind, method: DensityMethod, t_grid: Sequence[float], **kwargs: Any) -> DensityCurve:
    t = _t_array(t_grid)
    key = exp.name
    if method is DensityMethod.CLOSED_FORM:
        fn = mu_closed_form if kind is DensityKind.LEVY_MU else u_closed_form
        values = np.asarray(fn(key, t))
    elif method is DensityMethod.INVERSION:
        if kind is DensityKind.LEVY_MU:
            values = np.array([mu_numeric(exp, float(x), kwargs.get("extended", False)) for x in t])
        elif kind is DensityKind.POTENTIAL_U:
            values = np.array([u_numeric(exp, float(x), extended=kwargs.get("extended", False)) for x in t])
        else:
            values = np.array([tail_numeric(exp, float(x), kwargs.get("extended", False)) for x in t])
    else:
        if kind is DensityKind.LEVY_MU:
            values = np.asarray(mu_asymptotic(exp, t))
        elif kind is DensityKind.POTENTIAL_U:
            values = np.asarray(u_asymptotic(exp, t, **kwargs))
        else:
            raise UnsupportedError("no asymptotic formula for the tail")
    return DensityCurve(kind, method, tuple(t.tolist()), tuple(np.atleast_1d(values).tolist()), key)


# -----------------------------
# Checks
# -----------------------------
def sweep_levy_density(exp: LaplaceExponent, t_grid: Sequence[float], settings: Optional[Settings] = None) -> RatioSweep:
    """μ(t) / (t⁻²φ′(1/t)) sweep plus the explicit upper bound μ ≤ t⁻²φ′(1/t)/(1−2/e)."""
    alpha = _require_alpha(exp)
    if alpha >= 2.0:
        raise PreconditionError("the μ ≍ t⁻²φ′(1/t) comparison needs alpha < 2; use sweep_levy_density_critical")
    t = _t_array(t_grid)
    try:
        mu = np.asarray(levy_density(exp, t), dtype=float)
    except UnsupportedError:
        raise
    comparison = np.asarray(mu_asymptotic(exp, t), dtype=float)
    bound_ok = bool(np.all(mu <= comparison * LEVY_UPPER_CONSTANT))
    notes = {"explicit_bound_holds": bound_ok, "explicit_constant": LEVY_UPPER_CONSTANT}
    return judge(t, mu / comparison, "t^-2 phi'(1/t)", notes=notes, settings=settings)


def sweep_potential_density(
    exp: LaplaceExponent,
    t_grid: Sequence[float],
    convention: str = "karamata",
    settings: Optional[Settings] = None,
) -> RatioSweep:
    """u_numeric / u_asymptotic, expected to tend to 1 as t → 0."""
    t = _t_array(t_grid)
    u = np.asarray(potential_density(exp, t), dtype=float)
    asym = np.asarray(u_asymptotic(exp, t, convention=convention), dtype=float)
    ratios = u / asym
    dev = np.abs(ratios - 1.0)
    order = np.argsort(t)
    # deviation shrinking toward t → 0 over the two smallest decades
    window = order[t[order] <= t[order][0] * 100.0]
    shrinking = bool(np.all(np.diff(dev[window][::-1]) <= 1e-9))
    notes = {"deviation_shrinking": shrinking, "convention": convention}
    return judge(t, ratios, "u asymptotic", expect_limit_one=True, notes=notes, settings=settings)


def sweep_levy_density_critical(
    exp: LaplaceExponent,
    t_grid: Sequence[float],
    assumptions: Sequence[str] = ALPHA2_ASSUMPTIONS,
    settings: Optional[Settings] = None,
) -> RatioSweep:
    """α = 2: μ(t) / (t⁻²(tφ(1/t) − φ′(1/t)))."""
    alpha = _require_alpha(exp)
    if alpha != 2.0:
        raise PreconditionError("this comparison is stated for alpha = 2")
    missing = set(ALPHA2_ASSUMPTIONS) - set(assumptions)
    if missing:
        raise PreconditionError(f"assumptions not granted: {sorted(missing)}")
    t = _t_array(t_grid)
    mu = np.asarray(levy_density(exp, t), dtype=float)
    comparison = np.asarray(mu_asymptotic(exp, t), dtype=float)
    notes = {"assumed": list(assumptions)}
    return judge(t, mu / comparison, "t^-2 (t phi(1/t) - phi'(1/t))", notes=notes, settings=settings)


def levy_representation_check(exp: LaplaceExponent, lams: Sequence[float] = (0.5, 1.0, 10.0, 100.0)) -> Dict[str, Any]:
    """Quadrature of ∫(1 − e^{−λt})μ(t)dt + γλ + κ against φ(λ)."""
    entry = _entry(exp)
    if entry is None or entry.closed_form_mu is None:
        raise UnsupportedError(f"{exp.name}: representation check needs a closed-form Lévy density")
    mu = entry.closed_form_mu
    rows = []
    for lam in lams:
        res = integrate_0_inf(lambda t: -math.expm1(-lam * t) * float(mu(t)), tol=1e-12, scale_points=[1.0 / lam], rtol=1e-12)
        value = res.value + exp.drift * lam + (exp.kill_rate or 0.0)
        target = exp.phi(lam)
        rows.append({
            "lambda": lam,
            "quadrature": value,
            "phi": target,
            "rel_error": abs(value - target) / abs(target),
            "converged": res.converged,
        })
    return {"exponent": exp.name, "rows": rows, "max_rel_error": max(r["rel_error"] for r in rows)}


def duality_check(exp: LaplaceExponent, t_grid: Sequence[float]) -> Dict[str, Any]:
    """Potential density of λ/φ against the Lévy tail of φ."""
    conj = conjugate(exp)
    rows = []
    for t in _t_array(t_grid):
        u_star = u_numeric(conj, float(t))
        tail = tail_numeric(exp, float(t))
        rows.append({"t": float(t), "u_conjugate": u_star, "tail": tail, "rel_error": abs(u_star - tail) / abs(tail)})
    return {"exponent": exp.name, "rows": rows, "max_rel_error": max(r["rel_error"] for r in rows)}


# -----------------------------
# Tabulated profiles
# -----------------------------
class DensityProfile:
    """
    μ, u or ν̄ as a callable: closed form when known, otherwise a cubic spline
    in (log t, log value) through inversion values. Below the table the end
    slope is extrapolated; above it u stays at its last value (u decreasing)
    and μ, ν̄ drop to 0.
    """

    def __init__(
        self,
        kind: DensityKind,
        exponent_key: str,
        closed: Optional[Callable[[Any], Any]] = None,
        t_grid: Optional[np.ndarray] = None,
        values: Optional[np.ndarray] = None,
    ) -> None:
        self.kind = kind
        self.exponent_key = exponent_key
        self._closed = closed
        self.t_grid = t_grid
        self.values = values
        self._spline = None
        if closed is None:
            if t_grid is None or values is None or len(t_grid) < 4:
                raise NumericalError("profile needs at least 4 tabulated points", exponent=exponent_key)
            self._x = np.log(t_grid)
            self._y = np.log(values)
            self._spline = CubicSpline(self._x, self._y)
            self._slope_lo = (self._y[1] - self._y[0]) / (self._x[1] - self._x[0])

    @property
    def t_max(self) -> float:
        return float("inf") if self.t_grid is None else float(self.t_grid[-1])

    @property
    def is_closed_form(self) -> bool:
        return self._closed is not None

    def __call__(self, t: Any) -> Any:
        arr = _t_array(t)
        if self._closed is not None:
            out = np.asarray(self._closed(arr), dtype=float)
        else:
            x = np.log(arr)
            out = np.empty_like(x)
            lo = x < self._x[0]
            hi = x > self._x[-1]
            mid = ~(lo | hi)
            out[mid] = np.exp(self._spline(x[mid]))
            out[lo] = np.exp(self._y[0] + self._slope_lo * (x[lo] - self._x[0]))
            out[hi] = math.exp(self._y[-1]) if self.kind is DensityKind.POTENTIAL_U else 0.0
        return float(out) if out.ndim == 0 else out


def _tabulate(fn: Callable[[float], float], t_grid: np.ndarray, key: str, kind: DensityKind) -> tuple:
    ts, vals = [], []
    for t in t_grid:
        try:
            v = fn(float(t))
        except NumericalError as e:
            if ts and t > 1.0:
                # large-t inversion collapses once the density is exponentially small
                log.warning(f"[WARN] {kind.value} table for {key} truncated at t={t:g}: {e}")
                break
            raise
        if not (v > 0 and math.isfinite(v)):
            if ts and t > 1.0:
                break
            raise NumericalError("non-positive tabulated density", exponent=key, kind=kind.value, t=float(t), value=v)
        ts.append(float(t))
        vals.append(float(v))
    return np.array(ts), np.array(vals)


@lru_cache(maxsize=64)
def density_profile(
    exp: LaplaceExponent,
    kind: DensityKind,
    t_lo: float = 1e-14,
    t_hi: float = 1e4,
    per_decade: int = 12,
) -> DensityProfile:
    entry = _entry(exp)
    closed = None
    if entry is not None:
        closed = {
            DensityKind.LEVY_MU: entry.closed_form_mu,
            DensityKind.POTENTIAL_U: entry.closed_form_u,
            DensityKind.TAIL: entry.closed_form_tail,
        }[kind]
    if closed is not None:
        return DensityProfile(kind, exp.name, closed=closed)

    n = int(round(math.log10(t_hi / t_lo) * per_decade)) + 1
    grid = log_grid(t_lo, t_hi, n)
    fn = {
        DensityKind.LEVY_MU: lambda t: mu_numeric(exp, t, extended=True),
        DensityKind.POTENTIAL_U: lambda t: u_numeric(exp, t, extended=True),
        DensityKind.TAIL: lambda t: tail_numeric(exp, t, extended=True),
    }[kind]
    t0 = time.perf_counter()
    ts, vals = _tabulate(fn, grid, exp.name, kind)
    log.info(f"[TIMING] {kind.value} profile for {exp.name} n={ts.size} took {(time.perf_counter() - t0):.2f}s")
    return DensityProfile(kind, exp.name, t_grid=ts, values=vals)
