"""
Ratio sweeps: the finite-grid stand-in for "f ≍ g" and "f ∼ g" as r → 0+.

Verdict policy (shared by the laplace, densities, kernels and montecarlo modules):
  bounded         max/min ≤ spread threshold and |d log ratio / d log r| ≤ slope
                  threshold over the smallest decade of the grid
  converges_to_1  requested explicitly; |ratio − 1| small at the smallest r and
                  not larger there than at the largest r
  failed          anything else, or fewer than two usable points
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Settings, get_settings


class Verdict(str, Enum):
    BOUNDED = "bounded"
    CONVERGES_TO_1 = "converges_to_1"
    FAILED = "failed"


@dataclass(frozen=True)
class RatioSweep:
    r_grid: Tuple[float, ...]
    ratios: Tuple[float, ...]
    comparison_label: str
    verdict: Verdict
    log_slope_tail: float
    spread: float
    partial: bool = False
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict is not Verdict.FAILED

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.r_grid, self.ratios))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "comparison": self.comparison_label,
            "verdict": self.verdict.value,
            "log_slope_tail": self.log_slope_tail,
            "spread": self.spread,
            "partial": self.partial,
            "r_grid": list(self.r_grid),
            "ratios": list(self.ratios),
            "notes": self.notes,
        }


def tail_log_slope(r: np.ndarray, ratios: np.ndarray, decades: float = 1.0) -> float:
    """Least-squares slope of log ratio vs log r over the smallest `decades` of r."""
    order = np.argsort(r)
    r, ratios = r[order], ratios[order]
    window = r <= r[0] * 10.0**decades
    if window.sum() < 2:
        window[:2] = True
    return float(np.polyfit(np.log(r[window]), np.log(ratios[window]), 1)[0])


def judge(
    r_grid: Sequence[float],
    ratios: Sequence[float],
    label: str,
    *,
    expect_limit_one: bool = False,
    one_tol: float = 0.05,
    notes: Optional[Dict[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> RatioSweep:
    settings = settings or get_settings()
    r = np.asarray(r_grid, dtype=float)
    q = np.asarray(ratios, dtype=float)
    usable = np.isfinite(q) & (q > 0)
    partial = bool(not usable.all())
    notes = dict(notes or {})

    if usable.sum() < 2:
        return RatioSweep(tuple(r.tolist()), tuple(q.tolist()), label, Verdict.FAILED, float("nan"), float("inf"), partial, notes)

    ru, qu = r[usable], q[usable]
    spread = float(qu.max() / qu.min())
    slope = tail_log_slope(ru, qu)

    verdict = Verdict.FAILED
    if spread <= settings.ratio_max_spread and abs(slope) <= settings.ratio_max_slope:
        verdict = Verdict.BOUNDED
    if expect_limit_one:
        order = np.argsort(ru)
        dev = np.abs(qu[order] - 1.0)
        notes["deviation_smallest_r"] = float(dev[0])
        notes["deviation_largest_r"] = float(dev[-1])
        if dev[0] <= one_tol and dev[0] <= dev[-1]:
            verdict = Verdict.CONVERGES_TO_1

    return RatioSweep(tuple(r.tolist()), tuple(q.tolist()), label, verdict, slope, spread, partial, notes)
