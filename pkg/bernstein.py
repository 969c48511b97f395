"""
Laplace exponents of subordinators (Bernstein functions) and the built-in catalog.

Every exponent is stored as a formula `f(lam, m)` where `m` is the math namespace
(numpy for fast real evaluation, mpmath for extended precision and complex
arguments used by the Laplace inverters).
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Tuple

import mpmath
import numpy as np
from scipy import special

from config import get_logger
from errors import DomainError, NumericalError

log = get_logger("bernstein")

Formula = Callable[[Any, Any], Any]

_STEP = np.finfo(float).eps ** (1.0 / 3.0)
KILL_PROBE = 1e-12

DEFAULT_KEYS = (
    "stable(0.5)",
    "stable(1)",
    "stable(1.5)",
    "stable-log(1)",
    "vg",
    "geo(1)",
    "geo-iter(2,2)",
    "conj-geo-iter(2,2)",
    "example3",
    "drift",
)


def _positive(lam: Any, name: str = "lambda") -> np.ndarray:
    arr = np.asarray(lam, dtype=float)
    if arr.size == 0 or not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be positive and finite, got {lam!r}")
    return arr


def _unwrap(value: np.ndarray, scalar: bool) -> Any:
    return float(value) if scalar else value


def numerical_derivative(f: Callable[[np.ndarray], np.ndarray], lam: np.ndarray) -> np.ndarray:
    """Central difference with h = λ·eps^(1/3), one Richardson step."""
    h = lam * _STEP
    d_h = (f(lam + h) - f(lam - h)) / (2.0 * h)
    h2 = h / 2.0
    d_h2 = (f(lam + h2) - f(lam - h2)) / (2.0 * h2)
    return (4.0 * d_h2 - d_h) / 3.0


def _probe_kill_rate(formula: Formula) -> float:
    # φ(0+): a plateau between 1e-12 and 1e-24 means a killing term, otherwise 0
    with np.errstate(all="ignore"):
        v1 = float(formula(np.float64(KILL_PROBE), np))
        v2 = float(formula(np.float64(KILL_PROBE**2), np))
    if not (v1 > 0 and np.isfinite(v1)):
        return 0.0
    if v2 >= v1 * (1.0 - 1e-6):
        return v2
    return 0.0


@dataclass(frozen=True, eq=False)
class LaplaceExponent:
    """
    A Bernstein Laplace exponent φ with its derivative and metadata.

    - drift: linear coefficient γ of the Lévy–Khintchine representation
    - kill_rate: φ(0+)
    - alpha: regular-variation parameter (φ′ has index α/2 − 1), None when unknown
    - family/params/parts: structure used by the Monte Carlo samplers
    """

    label: str
    formula: Formula
    derivative: Optional[Formula] = None
    drift: float = 0.0
    alpha: Optional[float] = None
    is_complete_bernstein: bool = True
    key: Optional[str] = None
    family: str = "generic"
    params: Tuple[Any, ...] = ()
    parts: Tuple["LaplaceExponent", ...] = ()
    kill_rate: Optional[float] = None

    def __post_init__(self) -> None:
        if self.drift < 0:
            raise DomainError(f"drift must be >= 0, got {self.drift}")
        if self.alpha is not None and not 0.0 <= self.alpha <= 2.0:
            raise DomainError(f"alpha must lie in [0, 2], got {self.alpha}")
        if self.kill_rate is None:
            object.__setattr__(self, "kill_rate", _probe_kill_rate(self.formula))

    @property
    def name(self) -> str:
        return self.key or self.label

    @property
    def has_closed_derivative(self) -> bool:
        return self.derivative is not None

    def phi(self, lam: Any) -> Any:
        arr = _positive(lam)
        with np.errstate(over="ignore"):
            value = np.asarray(self.formula(arr, np), dtype=float)
        return _unwrap(value, arr.ndim == 0)

    def phi_prime(self, lam: Any) -> Any:
        arr = _positive(lam)
        with np.errstate(over="ignore"):
            value = np.asarray(self.derivative_at(arr, np), dtype=float)
        return _unwrap(value, arr.ndim == 0)

    def derivative_at(self, lam: Any, m: Any) -> Any:
        """φ′ in namespace m, closed form when known, numerical otherwise."""
        if self.derivative is not None:
            return self.derivative(lam, m)
        if m is mpmath:
            return mpmath.diff(lambda z: self.formula(z, mpmath), lam)
        return numerical_derivative(lambda x: self.formula(x, np), np.asarray(lam, dtype=float))

    def phi_mp(self, p: Any) -> Any:
        return self.formula(p, mpmath)

    def phi_prime_mp(self, p: Any) -> Any:
        return self.derivative_at(p, mpmath)

    def characteristic_exponent(self, xi: Any) -> Any:
        """Φ(ξ) = φ(|ξ|²) for ξ of shape (..., d)."""
        xi = np.asarray(xi, dtype=float)
        return self.phi(np.sum(xi * xi, axis=-1))

    def describe(self) -> Dict[str, Any]:
        return {
            "key": self.key,
            "label": self.label,
            "drift": self.drift,
            "kill_rate": self.kill_rate,
            "alpha": self.alpha,
            "is_complete_bernstein": self.is_complete_bernstein,
            "closed_derivative": self.has_closed_derivative,
            "family": self.family,
        }


@dataclass(frozen=True)
class CatalogEntry:
    key: str
    exponent: LaplaceExponent
    expected_alpha: float
    closed_form_mu: Optional[Callable[[Any], Any]] = None
    closed_form_u: Optional[Callable[[Any], Any]] = None
    closed_form_tail: Optional[Callable[[Any], Any]] = None


def eval_phi(exp: LaplaceExponent, lam: Any) -> Any:
    return exp.phi(lam)


def eval_phi_prime(exp: LaplaceExponent, lam: Any) -> Any:
    return exp.phi_prime(lam)


# -----------------------------
# Algebra
# -----------------------------
def compose(outer: LaplaceExponent, inner: LaplaceExponent, label: Optional[str] = None) -> LaplaceExponent:
    """λ ↦ outer(inner(λ)) with chain-rule derivative."""

    def formula(lam: Any, m: Any) -> Any:
        return outer.formula(inner.formula(lam, m), m)

    def derivative(lam: Any, m: Any) -> Any:
        return outer.derivative_at(inner.formula(lam, m), m) * inner.derivative_at(lam, m)

    alpha = None
    if outer.alpha is not None and inner.alpha is not None:
        alpha = outer.alpha * inner.alpha / 2.0

    return LaplaceExponent(
        label=label or f"{outer.name}∘{inner.name}",
        formula=formula,
        derivative=derivative,
        drift=outer.drift * inner.drift,
        alpha=alpha,
        is_complete_bernstein=outer.is_complete_bernstein and inner.is_complete_bernstein,
        family="compose",
        parts=(outer, inner),
    )


def _nonzero(value: Any, m: Any) -> Any:
    if m is np:
        if np.any(np.asarray(value) == 0):
            raise NumericalError("conjugate undefined where phi vanishes")
    elif value == 0:
        raise NumericalError("conjugate undefined where phi vanishes")
    return value


def conjugate(exp: LaplaceExponent, label: Optional[str] = None) -> LaplaceExponent:
    """λ ↦ λ/φ(λ) with quotient-rule derivative."""
    if not exp.is_complete_bernstein:
        msg = f"conjugate of {exp.name}: input not flagged complete Bernstein, result is not either"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        log.warning(f"[WARN] {msg}")

    def formula(lam: Any, m: Any) -> Any:
        return lam / _nonzero(exp.formula(lam, m), m)

    def derivative(lam: Any, m: Any) -> Any:
        value = _nonzero(exp.formula(lam, m), m)
        return (value - lam * exp.derivative_at(lam, m)) / (value * value)

    return LaplaceExponent(
        label=label or f"conj({exp.name})",
        formula=formula,
        derivative=derivative,
        drift=0.0,
        alpha=None if exp.alpha is None else 2.0 - exp.alpha,
        is_complete_bernstein=exp.is_complete_bernstein,
        family="conjugate",
        parts=(exp,),
    )


# -----------------------------
# Catalog builders
# -----------------------------
def _fmt(x: float) -> str:
    return format(float(x), "g")


def stable(alpha: float) -> LaplaceExponent:
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"stable index must lie in (0, 2), got {alpha}")
    a = alpha / 2.0
    key = f"stable({_fmt(alpha)})"
    return LaplaceExponent(
        label=key,
        formula=lambda lam, m: m.power(lam, a),
        derivative=lambda lam, m: a * m.power(lam, a - 1.0),
        alpha=alpha,
        key=key,
        family="stable",
        params=(alpha,),
    )


def stable_log(alpha: float) -> LaplaceExponent:
    """λ^(α/2) · log(1+λ)^(1−α/2)."""
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"stable-log index must lie in (0, 2), got {alpha}")
    a = alpha / 2.0
    key = f"stable-log({_fmt(alpha)})"

    def formula(lam: Any, m: Any) -> Any:
        return m.power(lam, a) * m.power(m.log1p(lam), 1.0 - a)

    def derivative(lam: Any, m: Any) -> Any:
        L = m.log1p(lam)
        return a * m.power(lam, a - 1.0) * m.power(L, 1.0 - a) + (1.0 - a) * m.power(lam, a) * m.power(L, -a) / (1.0 + lam)

    return LaplaceExponent(label=key, formula=formula, derivative=derivative, alpha=alpha, key=key, params=(alpha,))


def variance_gamma() -> LaplaceExponent:
    return LaplaceExponent(
        label="vg",
        formula=lambda lam, m: m.log1p(lam),
        derivative=lambda lam, m: 1.0 / (1.0 + lam),
        alpha=0.0,
        key="vg",
        family="vg",
    )


def geometric_stable(beta: float) -> LaplaceExponent:
    """log(1 + λ^(β/2)); β = 2 is the variance gamma exponent."""
    if not 0.0 < beta <= 2.0:
        raise DomainError(f"geometric stable index must lie in (0, 2], got {beta}")
    b = beta / 2.0
    key = f"geo({_fmt(beta)})"
    return LaplaceExponent(
        label=key,
        formula=lambda lam, m: m.log1p(m.power(lam, b)),
        derivative=lambda lam, m: b * m.power(lam, b - 1.0) / (1.0 + m.power(lam, b)),
        alpha=0.0,
        key=key,
        family="geo",
        params=(beta,),
    )


def iterated_geometric_stable(beta: float, n: int) -> LaplaceExponent:
    """φ_1 = geo(β), φ_{k+1} = φ_1 ∘ φ_k."""
    if n < 1:
        raise DomainError(f"iteration count must be >= 1, got {n}")
    first = geometric_stable(beta)
    current = first
    for _ in range(n - 1):
        current = compose(first, current)
    key = f"geo-iter({_fmt(beta)},{n})"
    return replace(current, label=key, key=key, alpha=0.0)


def conjugate_iterated_geometric_stable(beta: float, n: int) -> LaplaceExponent:
    base = iterated_geometric_stable(beta, n)
    key = f"conj-geo-iter({_fmt(beta)},{n})"
    return replace(conjugate(base), label=key, key=key, alpha=2.0)


def example3() -> LaplaceExponent:
    """λ / log(1+√λ), the conjugate of geo(1)."""

    def formula(lam: Any, m: Any) -> Any:
        return lam / m.log1p(m.sqrt(lam))

    def derivative(lam: Any, m: Any) -> Any:
        s = m.sqrt(lam)
        L = m.log1p(s)
        return 1.0 / L - s / (2.0 * (1.0 + s) * L * L)

    return LaplaceExponent(label="example3", formula=formula, derivative=derivative, alpha=2.0, key="example3")


def unit_drift() -> LaplaceExponent:
    return LaplaceExponent(
        label="drift",
        formula=lambda lam, m: lam * 1.0,
        derivative=lambda lam, m: lam * 0.0 + 1.0,
        drift=1.0,
        alpha=2.0,
        key="drift",
        family="drift",
        kill_rate=0.0,
    )


# -----------------------------
# Closed forms
# -----------------------------
def _stable_forms(alpha: float) -> Dict[str, Callable[[Any], Any]]:
    a = alpha / 2.0
    g1 = special.gamma(1.0 - a)
    ga = special.gamma(a)
    return {
        "mu": lambda t: a / g1 * np.power(_positive(t, "t"), -1.0 - a),
        "u": lambda t: np.power(_positive(t, "t"), a - 1.0) / ga,
        "tail": lambda t: np.power(_positive(t, "t"), -a) / g1,
    }


def _vg_mu(t: Any) -> Any:
    t = _positive(t, "t")
    return np.exp(-t) / t


def _vg_tail(t: Any) -> Any:
    return special.exp1(_positive(t, "t"))


def _zero(t: Any) -> Any:
    return np.zeros_like(_positive(t, "t"))


def _one(t: Any) -> Any:
    return np.ones_like(_positive(t, "t"))


_KEY_PATTERNS = [
    (re.compile(r"^(stable|stable-log|geo)\(([^,()]+)\)$"), "one"),
    (re.compile(r"^(geo-iter|conj-geo-iter)\(([^,()]+),([^,()]+)\)$"), "two"),
    (re.compile(r"^(vg|example3|drift)$"), "none"),
]


def _parse_key(key: str) -> Tuple[str, Tuple[float, ...]]:
    text = str(key).replace(" ", "")
    for pattern, arity in _KEY_PATTERNS:
        match = pattern.match(text)
        if not match:
            continue
        name = match.group(1)
        try:
            if arity == "one":
                return name, (float(match.group(2)),)
            if arity == "two":
                n = float(match.group(3))
                if n != int(n):
                    raise ValueError
                return name, (float(match.group(2)), int(n))
        except ValueError:
            raise DomainError(f"bad parameters in catalog key {key!r}")
        return name, ()
    raise DomainError(f"unknown catalog key {key!r}; known forms: {', '.join(DEFAULT_KEYS)}")


@lru_cache(maxsize=None)
def _build_entry(name: str, params: Tuple[float, ...]) -> CatalogEntry:
    if name == "stable":
        exp = stable(params[0])
        forms = _stable_forms(params[0])
        return CatalogEntry(exp.key, exp, params[0], forms["mu"], forms["u"], forms["tail"])
    if name == "stable-log":
        exp = stable_log(params[0])
        return CatalogEntry(exp.key, exp, params[0])
    if name == "geo":
        exp = geometric_stable(params[0])
        if params[0] == 2.0:
            return CatalogEntry(exp.key, exp, 0.0, _vg_mu, None, _vg_tail)
        return CatalogEntry(exp.key, exp, 0.0)
    if name == "geo-iter":
        exp = iterated_geometric_stable(params[0], int(params[1]))
        return CatalogEntry(exp.key, exp, 0.0)
    if name == "conj-geo-iter":
        exp = conjugate_iterated_geometric_stable(params[0], int(params[1]))
        return CatalogEntry(exp.key, exp, 2.0)
    if name == "vg":
        return CatalogEntry("vg", variance_gamma(), 0.0, _vg_mu, None, _vg_tail)
    if name == "example3":
        return CatalogEntry("example3", example3(), 2.0)
    return CatalogEntry("drift", unit_drift(), 2.0, _zero, _one, _zero)


def get_entry(key: str) -> CatalogEntry:
    name, params = _parse_key(key)
    return _build_entry(name, params)


def get_exponent(key: str) -> LaplaceExponent:
    return get_entry(key).exponent


def list_catalog(keys: Tuple[str, ...] = DEFAULT_KEYS) -> List[CatalogEntry]:
    return [get_entry(k) for k in keys]


# -----------------------------
# Grid checks
# -----------------------------
def bernstein_grid_report(exp: LaplaceExponent, grid: Any, slack: float = 1e-12) -> Dict[str, Any]:
    """
    Checks the Bernstein-function properties that are testable on a grid:
    φ increasing and concave, φ′ positive and non-increasing, λφ′(λ) ≤ φ(λ).
    """
    lam = np.sort(_positive(grid))
    phi = np.asarray(exp.phi(lam), dtype=float)
    dphi = np.asarray(exp.phi_prime(lam), dtype=float)

    slopes = np.diff(phi) / np.diff(lam)
    rel = 1e-9
    concave = bool(np.all(slopes[1:] <= slopes[:-1] * (1.0 + rel) + 1e-300))
    dphi_decreasing = bool(np.all(dphi[1:] <= dphi[:-1] * (1.0 + rel) + 1e-300))
    gap = lam * dphi - phi

    return {
        "exponent": exp.name,
        "grid_points": int(lam.size),
        "increasing": bool(np.all(np.diff(phi) > 0)),
        "concave": concave,
        "phi_prime_positive": bool(np.all(dphi > 0)),
        "phi_prime_decreasing": dphi_decreasing,
        "bernstein_inequality": bool(np.all(gap <= slack)),
        "max_inequality_gap": float(np.max(gap)),
    }
