"""
Regular variation at infinity, measured on finite probe sets:
index estimation, de Haan slowly varying limits, Potter-type bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from config import get_logger
from errors import DomainError, NumericalError

log = get_logger("regvar")

DEFAULT_X_POINTS = (2.0, 4.0, 8.0, 16.0)


@dataclass(frozen=True)
class RVFit:
    index: float
    grid: Tuple[float, ...]
    log_ratio_samples: Tuple[Tuple[float, float], ...]
    residual: float
    lam_fit: float
    window: str
    sweep_indices: Tuple[float, ...] = ()

    @property
    def alpha(self) -> float:
        return alpha_from_index(self.index)

    def to_dict(self) -> Dict:
        return {
            "index": self.index,
            "alpha": self.alpha,
            "lam_fit": self.lam_fit,
            "residual": self.residual,
            "window": self.window,
            "grid": list(self.grid),
            "sweep_indices": list(self.sweep_indices),
            "log_ratio_samples": [list(p) for p in self.log_ratio_samples],
        }


def alpha_from_index(index: float) -> float:
    """φ′ regularly varying with index α/2 − 1."""
    return float(min(2.0, max(0.0, 2.0 * (index + 1.0))))


def _logf(f: Callable[[float], float], lam: float) -> float:
    value = float(f(lam))
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"function must be positive and finite on the probe set, f({lam:g})={value!r}")
    return math.log(value)


def _slope_through_origin(f: Callable[[float], float], lam: float, x_points: Sequence[float]) -> Tuple[float, List[Tuple[float, float]]]:
    base = _logf(f, lam)
    samples = [(float(x), _logf(f, lam * x) - base) for x in x_points]
    lx = np.log([s[0] for s in samples])
    ly = np.array([s[1] for s in samples])
    return float(np.dot(lx, ly) / np.dot(lx, lx)), samples


def estimate_rv_index(
    f: Callable[[float], float],
    lam_max: float,
    x_points: Sequence[float] = DEFAULT_X_POINTS,
    decades: int = 4,
) -> RVFit:
    """
    Least-squares slope of log f(λx) − log f(λ) against log x at λ = lam_max.
    The same fit is repeated one decade apart over `decades` decades below
    lam_max to expose pre-asymptotic drift.
    """
    if not lam_max > 0:
        raise DomainError(f"lam_max must be positive, got {lam_max}")
    if not x_points or any(x <= 0 or x == 1 for x in x_points):
        raise DomainError("x_points must be positive and different from 1")

    index, samples = _slope_through_origin(f, lam_max, x_points)
    lx = np.log([s[0] for s in samples])
    residual = float(np.max(np.abs(np.array([s[1] for s in samples]) - index * lx)))

    grid = [lam_max * 10.0 ** (-k) for k in range(decades, -1, -1)]
    sweep = [_slope_through_origin(f, lam, x_points)[0] for lam in grid]
    window = f"lambda={lam_max:g}, x in {list(x_points)}"
    return RVFit(index, tuple(grid), tuple(samples), residual, float(lam_max), window, tuple(sweep))


# -----------------------------
# de Haan
# -----------------------------
@dataclass(frozen=True)
class DeHaanReport:
    lam_grid: Tuple[float, ...]
    L_over_ell: Tuple[float, ...]
    increasing: bool
    deviations: Tuple[float, ...]
    deviation_shrinking: bool
    samples: Tuple[Tuple[float, float, float], ...]
    lower: float
    notes: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "lam_grid": list(self.lam_grid),
            "L_over_ell": list(self.L_over_ell),
            "increasing": self.increasing,
            "deviations": list(self.deviations),
            "deviation_shrinking": self.deviation_shrinking,
            "samples_at_lam_max": [list(s) for s in self.samples],
            "lower": self.lower,
        }


def _cumulative_L(ell: Callable[[float], float], points: Sequence[float], lower: float) -> Dict[float, float]:
    """L(λ) = ∫_lower^λ ℓ(t)/t dt at every point, integrated in s = log t."""
    g = lambda s: float(ell(math.exp(s)))  # noqa: E731
    out: Dict[float, float] = {}
    total = 0.0
    prev = -np.inf if lower == 0 else math.log(lower)
    for lam in sorted(set(points)):
        s = math.log(lam)
        value, err, *rest = integrate.quad(g, prev, s, epsabs=1e-13, epsrel=1e-12, limit=200, full_output=1)
        if len(rest) > 1:
            raise NumericalError("de Haan quadrature did not converge", lam=lam, value=value, abs_error=err, message=rest[1])
        total += value
        out[lam] = total
        prev = s
    return out


def check_de_haan(
    ell: Callable[[float], float],
    lam_max: float,
    lower: float = 0.0,
    x_points: Sequence[float] = (2.0, 3.0, 5.0, 10.0),
    decades: int = 4,
) -> DeHaanReport:
    """
    (a) L(λ)/ℓ(λ) along a λ sweep (should grow without bound),
    (b) max over x of |(L(λx) − L(λ))/ℓ(λ) − log x| at each λ (should shrink).
    """
    if not lam_max > max(lower, 0.0):
        raise DomainError("lam_max must exceed the lower integration limit")
    grid = [lam_max * 10.0 ** (-k) for k in range(decades, -1, -1)]
    grid = [lam for lam in grid if lam > lower]
    needed = list(grid) + [lam * x for lam in grid for x in x_points]
    L = _cumulative_L(ell, needed, lower)

    ratios, deviations = [], []
    samples: List[Tuple[float, float, float]] = []
    for lam in grid:
        e = float(ell(lam))
        if not e > 0:
            raise DomainError(f"ell must be positive, ell({lam:g})={e!r}")
        ratios.append(L[lam] / e)
        dev = 0.0
        for x in x_points:
            value = (L[lam * x] - L[lam]) / e
            dev = max(dev, abs(value - math.log(x)))
            if lam == grid[-1]:
                samples.append((float(x), value, math.log(x)))
        deviations.append(dev)

    increasing = bool(np.all(np.diff(ratios) > 0))
    shrinking = bool(np.all(np.diff(deviations) <= 1e-12))
    return DeHaanReport(tuple(grid), tuple(ratios), increasing, tuple(deviations), shrinking, tuple(samples), lower)


# -----------------------------
# Potter bounds
# -----------------------------
@dataclass(frozen=True)
class PotterFit:
    constant: float
    delta: float
    delta_prime: float
    index: float
    bounded: bool
    decade_maxima: Tuple[float, ...]

    def to_dict(self) -> Dict:
        return {
            "constant": self.constant,
            "delta": self.delta,
            "delta_prime": self.delta_prime,
            "index": self.index,
            "bounded": self.bounded,
            "decade_maxima": list(self.decade_maxima),
        }


def fit_potter_bound(
    f: Callable[[float], float],
    delta: float,
    lam_min: float,
    index: Optional[float] = None,
    lam_decades: int = 6,
    t_decades: int = 6,
    points_per_decade: int = 4,
) -> PotterFit:
    """
    Smallest A on the mesh with f(λ/t)/f(λ) ≤ A·t^{δ′}, λ ≥ lam_min, t ≤ 1,
    δ′ = −ρ − δ. Maxima growing across the last three t-decades by more
    than a factor 10 are reported as unbounded.
    """
    if not delta > 0 or not lam_min > 0:
        raise DomainError("delta and lam_min must be positive")
    rho = index if index is not None else estimate_rv_index(f, lam_min * 10.0 ** lam_decades).index
    delta_prime = -rho - delta

    lams = np.logspace(math.log10(lam_min), math.log10(lam_min) + lam_decades, lam_decades * points_per_decade + 1)
    f_lam = np.array([float(f(lam)) for lam in lams])
    if np.any(~(f_lam > 0)):
        raise DomainError("f must be positive on the mesh")

    maxima = []
    for k in range(t_decades):
        ts = np.logspace(-k, -(k + 1), points_per_decade + 1)
        best = 0.0
        for t in ts:
            num = np.array([float(f(lam / t)) for lam in lams])
            best = max(best, float(np.max(num / f_lam / t**delta_prime)))
        maxima.append(best)

    constant = max(maxima)
    tail = maxima[-3:]
    growing = len(tail) == 3 and tail[0] < tail[1] < tail[2] and tail[2] > 10.0 * maxima[0]
    bounded = math.isfinite(constant) and not growing
    if not bounded:
        log.warning(f"[WARN] Potter constant grows on the mesh: {maxima}")
    return PotterFit(constant, delta, delta_prime, rho, bounded, tuple(maxima))
