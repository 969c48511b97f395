"""
Monte Carlo for subordinators and subordinate Brownian motion.

Paths are simulated on a time skeleton X_{kh} = B(S_{kh}) with Brownian
increments of covariance 2ΔS·I (generator Δ). Work is split into blocks of a
fixed size; block b always draws from Philox(SeedSequence([seed, b])) and every
start point of a run reuses the same block streams (common random numbers).
Block results are merged in block order, so the output does not depend on the
number of worker processes.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special
from scipy.interpolate import RegularGridInterpolator
from scipy.stats import levy_stable

from bernstein import LaplaceExponent, get_exponent
from config import get_logger, get_settings
from densities import DensityKind, density_profile
from errors import DomainError, NumericalError, PreconditionError, UnsupportedError
from kernels import KernelKind, kernel_profile, sphere_area
from laplace import integrate_0_inf, log_grid
from ratios import RatioSweep, Verdict, judge

log = get_logger("montecarlo")

DEFAULT_JUMP_TRUNCATION = 1e-4
MAX_CENSORED_FRACTION = 1e-3


# -----------------------------
# Subordinator samplers
# -----------------------------
class CompoundPoissonSampler:
    """
    Jumps larger than ε as a compound Poisson process drawn from the tail
    ν̄(t) = μ(t, ∞); jumps below ε replaced by their mean and, when their
    variance is not negligible, a Gaussian with that variance.
    """

    def __init__(self, exp: LaplaceExponent, eps: float = DEFAULT_JUMP_TRUNCATION, n_table: int = 400) -> None:
        try:
            tail = density_profile(exp, DensityKind.TAIL)
        except NumericalError as e:
            raise UnsupportedError(f"{exp.name}: no Lévy density available for the generic sampler ({e})") from e
        self.exponent_key = exp.name
        self.eps = eps
        self.drift = exp.drift
        self.rate = float(tail(eps))
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise UnsupportedError(f"{exp.name}: tail mass at eps={eps:g} is {self.rate!r}")

        x_hi = 1e3 if tail.is_closed_form else tail.t_max
        x = log_grid(eps, max(x_hi, 10.0 * eps), n_table)
        q = np.asarray(tail(x), dtype=float) / self.rate
        keep = q > 0
        x, q = x[keep], np.minimum.accumulate(q[keep])
        self._log_x = np.log(x)[::-1]
        self._log_q = np.log(q)[::-1]
        self._end_slope = (self._log_q[0] - self._log_q[1]) / (self._log_x[0] - self._log_x[1])

        first = self._moment_below(tail, eps, 1)
        second = self._moment_below(tail, eps, 2)
        self.small_mean = first - eps * self.rate
        self.small_var = max(second - eps * eps * self.rate, 0.0)
        proxy = self._moment_below(tail, 1.0, 2) - float(tail(1.0))
        self.gaussian = self.small_var > 1e-3 * max(proxy, 0.0)

    @staticmethod
    def _moment_below(tail: Callable[[Any], Any], eps: float, k: int) -> float:
        """k∫₀^ε s^{k-1} ν̄(s) ds."""
        res = integrate_0_inf(lambda s: k * s ** (k - 1) * float(tail(s)) if s <= eps else 0.0, tol=1e-12, scale_points=[eps], rtol=1e-8)
        if not res.converged:
            log.warning(f"[WARN] small-jump moment k={k} eps={eps:g} not converged (err={res.abs_error_estimate:.2e})")
        return res.value

    def jump_sizes(self, count: int, rng: np.random.Generator) -> np.ndarray:
        log_u = np.log1p(-rng.random(count))
        out = np.interp(log_u, self._log_q, self._log_x)
        beyond = log_u < self._log_q[0]
        if self._end_slope < 0:
            out[beyond] = self._log_x[0] + (log_u[beyond] - self._log_q[0]) / self._end_slope
        return np.exp(out)

    def draw(self, dt: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        counts = rng.poisson(self.rate * dt)
        total = int(counts.sum())
        jumps = np.zeros(dt.size)
        if total:
            owner = np.repeat(np.arange(dt.size), counts)
            jumps = np.bincount(owner, weights=self.jump_sizes(total, rng), minlength=dt.size)
        small = self.small_mean * dt
        if self.gaussian:
            small = np.maximum(small + np.sqrt(self.small_var * dt) * rng.standard_normal(dt.size), 0.0)
        return self.drift * dt + small + jumps


@lru_cache(maxsize=32)
def compound_poisson_sampler(exp: LaplaceExponent, eps: float = DEFAULT_JUMP_TRUNCATION) -> CompoundPoissonSampler:
    t0 = time.perf_counter()
    sampler = CompoundPoissonSampler(exp, eps)
    log.info(
        f"[MC] compound Poisson sampler {exp.name} eps={eps:g} rate={sampler.rate:.4g} "
        f"gaussian={sampler.gaussian} took {(time.perf_counter() - t0):.2f}s"
    )
    return sampler


def _stable_draw(alpha: float, dt: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # one-sided stable, E exp(-λS_dt) = exp(-dt·λ^a), S1 parameterization
    a = alpha / 2.0
    z = levy_stable.rvs(a, 1.0, size=dt.size, random_state=rng)
    scale = np.power(dt * math.cos(math.pi * a / 2.0), 1.0 / a)
    return np.maximum(scale * z, 0.0)


def _draw(exp: LaplaceExponent, dt: np.ndarray, rng: np.random.Generator, eps: float) -> np.ndarray:
    family = exp.family
    if family == "vg":
        return rng.gamma(dt)
    if family == "stable":
        return _stable_draw(exp.params[0], dt, rng)
    if family == "geo":
        beta = exp.params[0]
        g = rng.gamma(dt)
        return g if beta == 2.0 else _stable_draw(beta, g, rng)
    if family == "drift":
        return exp.drift * dt
    if family == "compose":
        outer, inner = exp.parts
        return _draw(inner, _draw(outer, dt, rng, eps), rng, eps)
    return compound_poisson_sampler(exp, eps).draw(dt, rng)


def draw_increments(exp: LaplaceExponent, dt: Any, rng: np.random.Generator, eps: float = DEFAULT_JUMP_TRUNCATION) -> np.ndarray:
    """Vectorized S_{Δt} draws; killed paths come back as +inf."""
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0):
        raise DomainError("time increments must be >= 0")
    flat = dt.ravel()
    out = _draw(exp, flat, rng, eps)
    if exp.kill_rate:
        out = np.where(rng.exponential(1.0 / exp.kill_rate, flat.size) < flat, np.inf, out)
    return out.reshape(dt.shape)


def sample_subordinator_increment(
    exp: LaplaceExponent,
    dt: float,
    rng: np.random.Generator,
    size: Optional[int] = None,
    eps: float = DEFAULT_JUMP_TRUNCATION,
) -> Any:
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    n = 1 if size is None else int(size)
    out = draw_increments(exp, np.full(n, float(dt)), rng, eps)
    return float(out[0]) if size is None else out


# -----------------------------
# Accumulators
# -----------------------------
@dataclass(frozen=True)
class Moments:
    """Count, sum and sum of squares; merging is addition."""

    n: int
    total: np.ndarray
    total_sq: np.ndarray

    @classmethod
    def of(cls, samples: np.ndarray) -> "Moments":
        samples = np.asarray(samples, dtype=float)
        return cls(int(samples.shape[0]), samples.sum(axis=0), np.square(samples).sum(axis=0))

    def __add__(self, other: "Moments") -> "Moments":
        return Moments(self.n + other.n, self.total + other.total, self.total_sq + other.total_sq)

    @property
    def mean(self) -> np.ndarray:
        return self.total / max(self.n, 1)

    @property
    def std_error(self) -> np.ndarray:
        if self.n < 2:
            return np.full_like(np.asarray(self.total, dtype=float), np.inf)
        var = (self.total_sq - self.n * np.square(self.mean)) / (self.n - 1)
        return np.sqrt(np.maximum(var, 0.0) / self.n)


def _block_rng(master_seed: int, block_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(master_seed), int(block_index)])))


def _block_sizes(n_paths: int, block_size: int) -> List[int]:
    full, rest = divmod(n_paths, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _map_blocks(fn: Callable[[Any], Any], tasks: Sequence[Any], workers: int) -> List[Any]:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


# -----------------------------
# Laplace transform identity
# -----------------------------
def _laplace_block(task: Tuple[str, float, Tuple[float, ...], int, int, int, float]) -> Moments:
    key, t, lams, seed, block, n, eps = task
    exp = get_exponent(key)
    s = draw_increments(exp, np.full(n, t), _block_rng(seed, block), eps)
    with np.errstate(invalid="ignore"):
        values = np.exp(-np.outer(s, np.asarray(lams)))
    return Moments.of(np.nan_to_num(values, nan=0.0))


def laplace_identity_check(
    key: str,
    lams: Sequence[float] = (0.5, 1.0, 2.0),
    times: Sequence[float] = (0.1, 1.0),
    n: int = 1_000_000,
    seed: int = 0,
    eps: float = DEFAULT_JUMP_TRUNCATION,
    workers: Optional[int] = None,
) -> Dict[str, Any]:
    """Empirical E exp(−λS_t) against exp(−tφ(λ)), 3 standard errors."""
    settings = get_settings()
    exp = get_exponent(key)
    workers = settings.workers if workers is None else workers
    rows = []
    t0 = time.perf_counter()
    for ti, t in enumerate(times):
        sizes = _block_sizes(n, settings.block_size)
        # blocks for the i-th time use indices offset by i·len(sizes)
        tasks = [(key, float(t), tuple(lams), seed, ti * len(sizes) + b, m, eps) for b, m in enumerate(sizes)]
        acc = _merge(_map_blocks(_laplace_block, tasks, workers))
        for lam, mean, se in zip(lams, acc.mean, acc.std_error):
            exact = math.exp(-t * float(exp.phi(lam)))
            diff = float(mean) - exact
            rows.append({
                "lambda": float(lam), "t": float(t), "empirical": float(mean), "exact": exact,
                "std_error": float(se), "z": diff / float(se) if se > 0 else 0.0,
                "ok": abs(diff) <= 3.0 * float(se) + 1e-12,
            })
    log.info(f"[MC] laplace identity {key} n={n} took {(time.perf_counter() - t0):.2f}s")
    return {"exponent": key, "n": n, "seed": seed, "rows": rows, "passed": all(r["ok"] for r in rows)}


def _merge(parts: Sequence[Moments]) -> Moments:
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total


# -----------------------------
# Spatial bins
# -----------------------------
@dataclass(frozen=True)
class BinSpec:
    """
    Bins in (|x|, cos θ) with θ the angle to the first axis. Flat index is
    i_radial · n_cos + i_cos; points outside every bin get −1.
    """

    d: int
    radial_edges: Tuple[float, ...]
    cos_edges: Tuple[float, ...] = (-1.0, 1.0)

    def __post_init__(self) -> None:
        if self.d < 2:
            raise DomainError("bins need d >= 2")
        r = np.asarray(self.radial_edges, dtype=float)
        c = np.asarray(self.cos_edges, dtype=float)
        if r.size < 2 or r[0] < 0 or np.any(np.diff(r) <= 0) or not np.all(np.isfinite(r)):
            raise DomainError(f"radial edges must be finite, >= 0 and increasing: {self.radial_edges}")
        if c.size < 2 or c[0] < -1 or c[-1] > 1 or np.any(np.diff(c) <= 0):
            raise DomainError(f"cos edges must increase within [-1, 1]: {self.cos_edges}")

    @classmethod
    def ball(cls, d: int, r: float, n_radial: int = 8, n_cos: int = 4) -> "BinSpec":
        return cls(d, tuple(np.linspace(0.0, r, n_radial + 1).tolist()), tuple(np.linspace(-1.0, 1.0, n_cos + 1).tolist()))

    @classmethod
    def shell(cls, d: int, r_in: float, r_out: float, n_radial: int = 6, n_cos: int = 4) -> "BinSpec":
        return cls(d, tuple(np.linspace(r_in, r_out, n_radial + 1).tolist()), tuple(np.linspace(-1.0, 1.0, n_cos + 1).tolist()))

    @property
    def n_radial(self) -> int:
        return len(self.radial_edges) - 1

    @property
    def n_cos(self) -> int:
        return len(self.cos_edges) - 1

    @property
    def n_bins(self) -> int:
        return self.n_radial * self.n_cos

    def locate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        rho = np.linalg.norm(points, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(rho > 0, points[:, 0] / rho, 1.0)
        ir = np.searchsorted(self.radial_edges, rho, side="right") - 1
        ic = np.clip(np.searchsorted(self.cos_edges, c, side="right") - 1, 0, self.n_cos - 1)
        inside = (ir >= 0) & (ir < self.n_radial) & np.isfinite(rho)
        return np.where(inside, ir * self.n_cos + ic, -1)

    def _cos_mass(self, c: np.ndarray) -> np.ndarray:
        k = (self.d - 1) / 2.0
        return 2.0 ** (self.d - 2) * special.beta(k, k) * special.betainc(k, k, (1.0 + np.asarray(c)) / 2.0)

    def volumes(self) -> np.ndarray:
        r = np.asarray(self.radial_edges)
        radial = (r[1:] ** self.d - r[:-1] ** self.d) / self.d
        angular = np.diff(self._cos_mass(np.asarray(self.cos_edges)))
        return sphere_area(self.d - 1) * np.outer(radial, angular).ravel()

    def centers(self) -> np.ndarray:
        r = np.asarray(self.radial_edges)
        c = np.asarray(self.cos_edges)
        rm = np.repeat((r[1:] + r[:-1]) / 2.0, self.n_cos)
        cm = np.tile((c[1:] + c[:-1]) / 2.0, self.n_radial)
        out = np.zeros((self.n_bins, self.d))
        out[:, 0] = rm * cm
        out[:, 1] = rm * np.sqrt(1.0 - cm * cm)
        return out

    def sample_points(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """m uniform points in every bin, shape (n_bins, m, d)."""
        k = (self.d - 1) / 2.0
        r = np.asarray(self.radial_edges)
        w = (1.0 + np.asarray(self.cos_edges)) / 2.0
        iw = special.betainc(k, k, w)
        out = np.empty((self.n_bins, m, self.d))
        for b in range(self.n_bins):
            ir, ic = divmod(b, self.n_cos)
            lo, hi = r[ir] ** self.d, r[ir + 1] ** self.d
            rho = (lo + rng.random(m) * (hi - lo)) ** (1.0 / self.d)
            c = 2.0 * special.betaincinv(k, k, iw[ic] + rng.random(m) * (iw[ic + 1] - iw[ic])) - 1.0
            omega = rng.standard_normal((m, self.d - 1))
            omega /= np.linalg.norm(omega, axis=1, keepdims=True)
            out[b, :, 0] = rho * c
            out[b, :, 1:] = (rho * np.sqrt(np.clip(1.0 - c * c, 0.0, None)))[:, None] * omega
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "radial_edges": list(self.radial_edges), "cos_edges": list(self.cos_edges)}


# -----------------------------
# Exit simulation
# -----------------------------
@dataclass(frozen=True)
class SimConfig:
    exponent_key: str
    d: int
    time_step: float
    master_seed: int
    n_paths: int
    ball_radius: float
    start_points: Tuple[Tuple[float, ...], ...]
    jump_truncation: float = DEFAULT_JUMP_TRUNCATION
    max_steps: Optional[int] = None
    block_size: Optional[int] = None
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        if self.d < 1:
            raise PreconditionError(f"dimension must be >= 1, got {self.d}")
        if not self.time_step > 0 or not self.jump_truncation > 0:
            raise PreconditionError("time_step and jump_truncation must be positive")
        if self.n_paths < 1:
            raise PreconditionError(f"n_paths must be >= 1, got {self.n_paths}")
        if not self.ball_radius > 0:
            raise PreconditionError(f"ball_radius must be positive, got {self.ball_radius}")
        if not self.start_points:
            raise PreconditionError("at least one start point is needed")
        starts = tuple(tuple(float(v) for v in p) for p in self.start_points)
        for p in starts:
            if len(p) != self.d:
                raise PreconditionError(f"start point {p} is not {self.d}-dimensional")
            if math.hypot(*p) >= self.ball_radius:
                raise PreconditionError(f"start point {p} is not inside the ball of radius {self.ball_radius}")
        object.__setattr__(self, "start_points", starts)

    @property
    def resolved_max_steps(self) -> int:
        return self.max_steps or get_settings().max_steps

    @property
    def resolved_block_size(self) -> int:
        return self.block_size or get_settings().block_size

    @property
    def resolved_workers(self) -> int:
        return self.workers or get_settings().workers

    def to_dict(self) -> Dict[str, Any]:
        return {
            "exponent": self.exponent_key, "dim": self.d, "time_step": self.time_step,
            "jump_truncation": self.jump_truncation, "seed": self.master_seed, "paths": self.n_paths,
            "radius": self.ball_radius, "start_points": [list(p) for p in self.start_points],
            "max_steps": self.resolved_max_steps, "block_size": self.resolved_block_size,
        }


@dataclass(frozen=True)
class ExitRecord:
    start: Tuple[float, ...]
    radius: float
    exit_time: float
    exit_position: Tuple[float, ...]
    exited_to_shell: Tuple[bool, ...]
    overshoot: bool
    killed: bool = False
    censored: bool = False


@dataclass
class ExitBatch:
    """All paths of one start point, as arrays."""

    start: np.ndarray
    radius: float
    time_step: float
    exit_time: np.ndarray
    exit_position: np.ndarray
    killed: np.ndarray
    censored: np.ndarray
    occupation: Optional[Moments] = None

    @property
    def n(self) -> int:
        return int(self.exit_time.size)

    @property
    def exited(self) -> np.ndarray:
        return ~(self.killed | self.censored)

    @property
    def exit_norm(self) -> np.ndarray:
        return np.linalg.norm(self.exit_position, axis=1)

    @property
    def overshoot(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return self.exited & (self.exit_norm - self.radius > math.sqrt(2.0 * self.start.size * self.time_step))

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean()) if self.n else 0.0

    def records(self, shells: Sequence[Tuple[float, float]] = ()) -> List[ExitRecord]:
        norms = self.exit_norm
        over = self.overshoot
        start = tuple(self.start.tolist())
        out = []
        for i in range(self.n):
            flags = tuple(bool(self.exited[i] and lo <= norms[i] < hi) for lo, hi in shells)
            out.append(ExitRecord(
                start, self.radius, float(self.exit_time[i]), tuple(self.exit_position[i].tolist()),
                flags, bool(over[i]), bool(self.killed[i]), bool(self.censored[i]),
            ))
        return out


@dataclass(frozen=True)
class _BlockTask:
    cfg: SimConfig
    block_index: int
    n: int
    bins: Optional[BinSpec] = None
    pair_diffs: bool = False


@dataclass
class _BlockResult:
    exit_time: List[np.ndarray]
    exit_position: List[np.ndarray]
    killed: List[np.ndarray]
    censored: List[np.ndarray]
    occupation: List[Optional[Moments]]
    pair_occupation: Dict[Tuple[int, int], Moments] = field(default_factory=dict)


def _walk(exp: LaplaceExponent, cfg: SimConfig, start: Tuple[float, ...], n: int, rng: np.random.Generator, bins: Optional[BinSpec]):
    d, h, r2 = cfg.d, cfg.time_step, cfg.ball_radius**2
    pos = np.tile(np.asarray(start, dtype=float), (n, 1))
    steps = np.zeros(n, dtype=np.int64)
    killed = np.zeros(n, dtype=bool)
    censored = np.zeros(n, dtype=bool)
    occ = np.zeros((n, bins.n_bins)) if bins is not None else None
    active = np.arange(n)
    k = 0
    max_steps = cfg.resolved_max_steps
    while active.size and k < max_steps:
        if occ is not None:
            idx = bins.locate(pos[active])
            hit = idx >= 0
            np.add.at(occ, (active[hit], idx[hit]), h)
        ds = draw_increments(exp, np.full(active.size, h), rng, cfg.jump_truncation)
        dead = ~np.isfinite(ds)
        ds = np.where(dead, 0.0, ds)
        pos[active] += np.sqrt(2.0 * ds)[:, None] * rng.standard_normal((active.size, d))
        k += 1
        p = pos[active]
        done = dead | (np.einsum("ij,ij->i", p, p) >= r2)
        finished = active[done]
        steps[finished] = k
        killed[active[dead]] = True
        active = active[~done]
    censored[active] = True
    steps[active] = k
    position = pos.copy()
    position[killed | censored] = np.nan
    return steps * h, position, killed, censored, occ


def _run_block(task: _BlockTask) -> _BlockResult:
    cfg = task.cfg
    exp = get_exponent(cfg.exponent_key)
    res = _BlockResult([], [], [], [], [])
    occupations = []
    for start in cfg.start_points:
        t, x, killed, censored, occ = _walk(exp, cfg, start, task.n, _block_rng(cfg.master_seed, task.block_index), task.bins)
        res.exit_time.append(t)
        res.exit_position.append(x)
        res.killed.append(killed)
        res.censored.append(censored)
        res.occupation.append(Moments.of(occ) if occ is not None else None)
        occupations.append(occ)
    if task.pair_diffs and task.bins is not None:
        for i in range(len(occupations)):
            for j in range(i + 1, len(occupations)):
                res.pair_occupation[(i, j)] = Moments.of(occupations[i] - occupations[j])
    return res


@dataclass
class SimulationResult:
    cfg: SimConfig
    batches: List[ExitBatch]
    bins: Optional[BinSpec] = None
    pair_occupation: Dict[Tuple[int, int], Moments] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def censored_fraction(self) -> float:
        return max(b.censored_fraction for b in self.batches)


def simulate_exit_batches(cfg: SimConfig, bins: Optional[BinSpec] = None, pair_diffs: bool = False) -> SimulationResult:
    """Exit simulation for every start point, with optional occupation histograms."""
    get_exponent(cfg.exponent_key)
    t0 = time.perf_counter()
    sizes = _block_sizes(cfg.n_paths, cfg.resolved_block_size)
    tasks = [_BlockTask(cfg, b, m, bins, pair_diffs) for b, m in enumerate(sizes)]
    blocks = _map_blocks(_run_block, tasks, cfg.resolved_workers)

    batches = []
    for i, start in enumerate(cfg.start_points):
        occ = None
        if bins is not None:
            occ = _merge([blk.occupation[i] for blk in blocks])
        batches.append(ExitBatch(
            np.asarray(start), cfg.ball_radius, cfg.time_step,
            np.concatenate([blk.exit_time[i] for blk in blocks]),
            np.concatenate([blk.exit_position[i] for blk in blocks]),
            np.concatenate([blk.killed[i] for blk in blocks]),
            np.concatenate([blk.censored[i] for blk in blocks]),
            occ,
        ))
    pairs = {}
    if pair_diffs and bins is not None and blocks:
        pairs = {key: _merge([blk.pair_occupation[key] for blk in blocks]) for key in blocks[0].pair_occupation}
    elapsed = time.perf_counter() - t0
    result = SimulationResult(cfg, batches, bins, pairs, elapsed)
    log.info(
        f"[MC] exit {cfg.exponent_key} d={cfg.d} r={cfg.ball_radius:g} h={cfg.time_step:g} "
        f"paths={cfg.n_paths} starts={len(cfg.start_points)} censored={result.censored_fraction:.2e} took {elapsed:.2f}s"
    )
    if result.censored_fraction >= MAX_CENSORED_FRACTION:
        log.warning(f"[WARN] censored fraction {result.censored_fraction:.2e} exceeds {MAX_CENSORED_FRACTION:g}")
    return result


def simulate_exit(cfg: SimConfig, shells: Optional[Sequence[Tuple[float, float]]] = None) -> List[ExitRecord]:
    r = cfg.ball_radius
    shells = ((r, 2.0 * r),) if shells is None else tuple(shells)
    records: List[ExitRecord] = []
    for batch in simulate_exit_batches(cfg).batches:
        records.extend(batch.records(shells))
    return records


# -----------------------------
# Kernel estimates
# -----------------------------
class EstimateTarget(str, Enum):
    POISSON_K = "poisson_K"
    GREEN_BALL_GD = "green_ball_GD"


@dataclass(frozen=True)
class KernelEstimate:
    target: EstimateTarget
    bins: BinSpec
    values: np.ndarray
    std_errors: np.ndarray
    n_paths: int
    start: Tuple[float, ...]
    notes: Dict[str, Any] = field(default_factory=dict)

    def mass(self) -> Tuple[float, float]:
        vol = self.bins.volumes()
        return float(np.sum(self.values * vol)), float(np.sqrt(np.sum(np.square(self.std_errors * vol))))

    def rows(self) -> List[Tuple[float, ...]]:
        centers = self.bins.centers()
        vol = self.bins.volumes()
        return [
            (float(np.linalg.norm(c)), float(c[0] / max(np.linalg.norm(c), 1e-300)), float(v), float(s), float(w))
            for c, v, s, w in zip(centers, self.values, self.std_errors, vol)
        ]

    def to_dict(self) -> Dict[str, Any]:
        total, total_se = self.mass()
        return {
            "target": self.target.value, "bins": self.bins.to_dict(), "n_paths": self.n_paths,
            "start": list(self.start), "values": self.values.tolist(), "std_errors": self.std_errors.tolist(),
            "mass": total, "mass_std_error": total_se, "notes": self.notes,
        }


def _flag_insufficient(values: np.ndarray, se: np.ndarray, target: float = 0.2) -> float:
    nonzero = values > 0
    if not nonzero.any():
        return 0.0
    return float(np.mean(se[nonzero] > target * values[nonzero]))


def green_estimate_from(batch: ExitBatch, bins: BinSpec) -> KernelEstimate:
    if batch.occupation is None:
        raise PreconditionError("simulation was run without occupation bins")
    vol = bins.volumes()
    values = batch.occupation.mean / vol
    se = batch.occupation.std_error / vol
    total = float(np.sum(batch.occupation.mean))
    notes = {
        "total_occupation": total,
        "mean_exit_time": float(batch.exit_time.mean()),
        "exit_time_std_error": float(batch.exit_time.std(ddof=1) / math.sqrt(batch.n)) if batch.n > 1 else float("inf"),
        "censored_fraction": batch.censored_fraction,
        "insufficient_fraction": _flag_insufficient(values, se),
    }
    return KernelEstimate(EstimateTarget.GREEN_BALL_GD, bins, values, se, batch.n, tuple(batch.start.tolist()), notes)


def poisson_estimate_from(batch: ExitBatch, bins: BinSpec) -> KernelEstimate:
    idx = bins.locate(np.nan_to_num(batch.exit_position, nan=np.inf))
    idx = idx[batch.exited & (idx >= 0)]
    p = np.bincount(idx, minlength=bins.n_bins) / batch.n
    vol = bins.volumes()
    se = np.sqrt(p * (1.0 - p) / max(batch.n - 1, 1))
    notes = {
        "censored_fraction": batch.censored_fraction,
        "killed_fraction": float(batch.killed.mean()),
        "insufficient_fraction": _flag_insufficient(p, se),
    }
    return KernelEstimate(EstimateTarget.POISSON_K, bins, p / vol, se / vol, batch.n, tuple(batch.start.tolist()), notes)


def estimate_green_ball(cfg: SimConfig, y_bins: BinSpec, start_index: int = 0) -> KernelEstimate:
    """Occupation-time histogram of G_{B_r}(x, ·) for x = start_points[start_index]."""
    if cfg.d < 3:
        raise PreconditionError("the killed-ball Green estimate needs d >= 3")
    if y_bins.d != cfg.d:
        raise PreconditionError("bin dimension does not match the simulation")
    result = simulate_exit_batches(cfg, bins=y_bins)
    return green_estimate_from(result.batches[start_index], y_bins)


def estimate_poisson_kernel(cfg: SimConfig, exterior_bins: BinSpec, start_index: int = 0) -> KernelEstimate:
    """Exit-position histogram of K_{B_r}(x, ·) over bins outside the ball."""
    if cfg.d < 3:
        raise PreconditionError("the Poisson kernel estimate needs d >= 3")
    if exterior_bins.d != cfg.d or exterior_bins.radial_edges[0] < cfg.ball_radius:
        raise PreconditionError("exterior bins must lie outside the ball and match its dimension")
    result = simulate_exit_batches(cfg)
    return poisson_estimate_from(result.batches[start_index], exterior_bins)


def green_ball_reference(exp: LaplaceExponent, batch: ExitBatch, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """G_B(x, y) = g(|y − x|) − E_x g(|X_τ − y|) at each point y, with the standard error of the correction."""
    d = batch.start.size
    g = kernel_profile(exp, KernelKind.GREEN_G, d)
    exit_pos = batch.exit_position[batch.exited]
    values, errors = [], []
    for y in np.atleast_2d(points):
        free = float(g(float(np.linalg.norm(y - batch.start))))
        corr = np.asarray(g(np.linalg.norm(exit_pos - y, axis=1)), dtype=float)
        full = np.concatenate([corr, np.zeros(batch.n - corr.size)])
        values.append(free - float(full.mean()))
        errors.append(float(full.std(ddof=1) / math.sqrt(batch.n)) if batch.n > 1 else float("inf"))
    return np.asarray(values), np.asarray(errors)


def _pair_kernel_matrix(exp: LaplaceExponent, z_bins: BinSpec, y_bins: BinSpec, points_per_bin: int, seed: int) -> np.ndarray:
    """J[zb, yb]: average of j(|z − y|) over stratified points of the two bins."""
    j = kernel_profile(exp, KernelKind.JUMP_J, z_bins.d)
    rng = _block_rng(seed, 2**31 - 1)
    zp = z_bins.sample_points(points_per_bin, rng)
    yp = y_bins.sample_points(points_per_bin, rng)
    out = np.empty((z_bins.n_bins, y_bins.n_bins))
    for a in range(z_bins.n_bins):
        for b in range(y_bins.n_bins):
            dist = np.linalg.norm(zp[a][:, None, :] - yp[b][None, :, :], axis=-1)
            out[a, b] = float(np.mean(j(np.maximum(dist, 1e-12))))
    return out


def ikeda_watanabe_check(
    cfg: SimConfig,
    exterior_bins: Optional[BinSpec] = None,
    ball_bins: Optional[BinSpec] = None,
    points_per_bin: int = 16,
    start_index: int = 0,
) -> Dict[str, Any]:
    """
    K̂(x, z) from exit positions against Σ_y Ĝ(x, y)·|y-bin|·J(z, y), where Ĝ
    is the occupation estimate from the same run. Passes when ≥ 90% of the
    well-resolved z-bins (SE < 20% of value) agree within 3 combined SE.
    """
    r = cfg.ball_radius
    exterior_bins = exterior_bins or BinSpec.shell(cfg.d, r, 2.0 * r, n_radial=4, n_cos=4)
    ball_bins = ball_bins or BinSpec.ball(cfg.d, r, n_radial=8, n_cos=4)
    exp = get_exponent(cfg.exponent_key)
    result = simulate_exit_batches(cfg, bins=ball_bins)
    batch = result.batches[start_index]
    green = green_estimate_from(batch, ball_bins)
    poisson = poisson_estimate_from(batch, exterior_bins)

    J = _pair_kernel_matrix(exp, exterior_bins, ball_bins, points_per_bin, cfg.master_seed)
    weights = ball_bins.volumes()[None, :] * J
    predicted = weights @ green.values
    predicted_se = np.sqrt(np.square(weights) @ np.square(green.std_errors))
    combined = np.sqrt(np.square(poisson.std_errors) + np.square(predicted_se))
    resolved = (poisson.values > 0) & (poisson.std_errors < 0.2 * poisson.values)
    agree = np.abs(poisson.values - predicted) <= 3.0 * combined
    fraction = float(agree[resolved].mean()) if resolved.any() else float("nan")
    return {
        "exponent": cfg.exponent_key, "d": cfg.d, "r": r, "n_paths": cfg.n_paths,
        "poisson": poisson.values.tolist(), "poisson_std_error": poisson.std_errors.tolist(),
        "predicted": predicted.tolist(), "predicted_std_error": predicted_se.tolist(),
        "resolved_bins": int(resolved.sum()), "agreement_fraction": fraction,
        "passed": bool(resolved.any() and fraction >= 0.9),
        "inconclusive": not bool(resolved.any()),
        "censored_fraction": result.censored_fraction,
    }


def green_ball_check(cfg: SimConfig, y_bins: Optional[BinSpec] = None, min_distance: Optional[float] = None) -> Dict[str, Any]:
    """Occupation estimate against g(|y−x|) − E_x g(|X_τ − y|) at bin centers away from x."""
    r = cfg.ball_radius
    y_bins = y_bins or BinSpec.ball(cfg.d, r, n_radial=6, n_cos=4)
    exp = get_exponent(cfg.exponent_key)
    result = simulate_exit_batches(cfg, bins=y_bins)
    batch = result.batches[0]
    est = green_estimate_from(batch, y_bins)
    centers = y_bins.centers()
    ref, ref_se = green_ball_reference(exp, batch, centers)
    min_distance = r / 4.0 if min_distance is None else min_distance
    far = np.linalg.norm(centers - batch.start, axis=1) >= min_distance
    combined = np.sqrt(np.square(est.std_errors) + np.square(ref_se))
    agree = np.abs(est.values - ref) <= 3.0 * combined
    total, total_se = est.mass()
    occupation_ok = abs(total - est.notes["mean_exit_time"]) <= 3.0 * total_se + 1e-12
    return {
        "exponent": cfg.exponent_key, "d": cfg.d, "r": r,
        "estimate": est.values.tolist(), "reference": ref.tolist(),
        "agreement_fraction": float(agree[far].mean()) if far.any() else float("nan"),
        "occupation_equals_exit_time": bool(occupation_ok),
        "passed": bool(far.any() and agree[far].mean() >= 0.9 and occupation_ok),
    }


# -----------------------------
# Sweeps and checks
# -----------------------------
def _check_key(exp: LaplaceExponent, cfg: SimConfig) -> None:
    if get_exponent(cfg.exponent_key) is not exp:
        raise PreconditionError(f"cfg.exponent_key {cfg.exponent_key!r} does not name exponent {exp.name!r}")


def _origin(d: int) -> Tuple[float, ...]:
    return (0.0,) * d


def _step_for(exp: LaplaceExponent, r: float, h: float) -> float:
    return min(h, 0.01 / float(exp.phi(r**-2.0)))


def shell_scale(exp: LaplaceExponent, r: float) -> float:
    """ρ(r) = r^{-2}φ′(r^{-2}) / φ(r^{-2})."""
    lam = r**-2.0
    return float(lam * exp.phi_prime(lam) / exp.phi(lam))


def _required_paths(n: int, p: float, se: float) -> int:
    if p <= 0:
        return -1
    return int(math.ceil(n * (se / (0.1 * p)) ** 2))


def krylov_safonov_sweep(exp: LaplaceExponent, d: int, r_list: Sequence[float], cfg: SimConfig) -> RatioSweep:
    """
    p(r) = P_0(exit of B_{r/2} lands in B_r∖B_{r/2}) against ρ(r); the B_{r/4}
    convention is reported alongside. Probabilities come with standard errors
    and a required-path estimate when SE > 20% of p.
    """
    _check_key(exp, cfg)
    rows = []
    for r in sorted(float(x) for x in r_list):
        h = _step_for(exp, r, cfg.time_step)
        row: Dict[str, Any] = {"r": r, "time_step": h, "rho": shell_scale(exp, r)}
        for name, frac in (("half", 0.5), ("quarter", 0.25)):
            sub = replace(cfg, d=d, ball_radius=frac * r, time_step=h, start_points=(_origin(d),))
            batch = simulate_exit_batches(sub).batches[0]
            hit = batch.exited & (batch.exit_norm < r)
            p = float(hit.mean())
            se = math.sqrt(p * (1.0 - p) / max(batch.n - 1, 1))
            row[f"p_{name}"] = p
            row[f"se_{name}"] = se
            row[f"censored_{name}"] = batch.censored_fraction
            row[f"inconclusive_{name}"] = se > 0.2 * p
            if se > 0.2 * p:
                row[f"paths_required_{name}"] = _required_paths(batch.n, p, se)
        rows.append(row)

    r_grid = [row["r"] for row in rows]
    ratios = [row["p_half"] / row["rho"] for row in rows]
    first, last = rows[0], rows[-1]
    gap = last["p_half"] - first["p_half"]
    separated = gap > 3.0 * math.hypot(first["se_half"], last["se_half"])
    notes = {
        "rows": rows,
        "ratios_quarter": [row["p_quarter"] / row["rho"] for row in rows],
        "p_decreasing": bool(separated),
        "ratio_min": float(min(ratios)),
        "inconclusive": any(row["inconclusive_half"] for row in rows),
        "censored_excess": any(row["censored_half"] >= MAX_CENSORED_FRACTION for row in rows),
        "assumed_decreasing_densities": True,
    }
    sweep = judge(r_grid, ratios, f"p(r) / rho(r) [{exp.name}, d={d}]", notes=notes)
    if exp.alpha == 0.0 and not separated and sweep.verdict is not Verdict.FAILED:
        sweep = replace(sweep, verdict=Verdict.FAILED)
    return sweep


def exit_time_sweep(exp: LaplaceExponent, d: int, radii: Sequence[float], cfg: SimConfig) -> RatioSweep:
    """E_0 τ_{B_r} against 1/φ(r^{-2})."""
    _check_key(exp, cfg)
    r_grid, ratios, rows = [], [], []
    for r in sorted(float(x) for x in radii):
        h = _step_for(exp, r, cfg.time_step)
        sub = replace(cfg, d=d, ball_radius=r, time_step=h, start_points=(_origin(d),))
        batch = simulate_exit_batches(sub).batches[0]
        mean = float(batch.exit_time.mean())
        se = float(batch.exit_time.std(ddof=1) / math.sqrt(batch.n)) if batch.n > 1 else float("inf")
        scale = 1.0 / float(exp.phi(r**-2.0))
        r_grid.append(r)
        ratios.append(mean / scale)
        rows.append({"r": r, "mean_exit_time": mean, "std_error": se, "scale": scale, "censored": batch.censored_fraction})
    return judge(r_grid, ratios, f"E0 tau / (1/phi(r^-2)) [{exp.name}, d={d}]", notes={"rows": rows})


def _radial_classes(batch: ExitBatch) -> np.ndarray:
    r = batch.radius
    norms = np.nan_to_num(batch.exit_norm, nan=np.inf)
    edges = [r, 1.5 * r, 2.0 * r, np.inf]
    return np.array([np.mean(batch.exited & (norms >= lo) & (norms < hi)) for lo, hi in zip(edges[:-1], edges[1:])])


def refinement_check(cfg: SimConfig) -> Dict[str, Any]:
    """Exit probabilities into [r,1.5r), [1.5r,2r), [2r,∞) at h and h/2 agree within 2 combined SE."""
    coarse = simulate_exit_batches(cfg).batches[0]
    fine = simulate_exit_batches(replace(cfg, time_step=cfg.time_step / 2.0)).batches[0]
    pc, pf = _radial_classes(coarse), _radial_classes(fine)
    se = np.sqrt(pc * (1 - pc) / coarse.n + pf * (1 - pf) / fine.n)
    ok = np.abs(pc - pf) <= 2.0 * se + 1e-12
    return {
        "exponent": cfg.exponent_key, "time_step": cfg.time_step,
        "coarse": pc.tolist(), "fine": pf.tolist(), "combined_std_error": se.tolist(),
        "passed": bool(ok.all()),
    }


# -----------------------------
# Harmonic functions
# -----------------------------
def _target_indicator(batch: ExitBatch, target: str) -> np.ndarray:
    if target == "exterior":
        return batch.exited.astype(float)
    if target == "half-space":
        pos = np.nan_to_num(batch.exit_position, nan=0.0)
        return (batch.exited & (pos[:, 0] > 0)).astype(float)
    raise DomainError(f"unknown harmonic target {target!r}")


def _target_value(points: np.ndarray, target: str) -> np.ndarray:
    return np.ones(len(points)) if target == "exterior" else (points[:, 0] > 0).astype(float)


def default_harmonic_grid(d: int, r: float, n: int = 9) -> List[Tuple[float, ...]]:
    """Points on the first axis spanning ±0.9·r/4."""
    xs = np.linspace(-0.9 * r / 4.0, 0.9 * r / 4.0, n)
    return [tuple([float(x)] + [0.0] * (d - 1)) for x in xs]


def _harmonic_nodes(exp: LaplaceExponent, d: int, R: float, cfg: SimConfig, target: str, n_radial: int, n_cos: int, paths: int):
    """f̂ on a (|z|, cos θ) node grid inside B_R, as a linear interpolator."""
    rho = (np.arange(n_radial) + 0.5) * R / n_radial
    cos = np.linspace(-1.0, 1.0, n_cos)
    starts = [(float(p * c), float(p * math.sqrt(max(1.0 - c * c, 0.0)))) + (0.0,) * (d - 2) for p in rho for c in cos]
    sub = replace(cfg, d=d, ball_radius=R, n_paths=paths, start_points=tuple(starts))
    batches = simulate_exit_batches(sub).batches
    values = np.array([_target_indicator(b, target).mean() for b in batches]).reshape(n_radial, n_cos)
    interp = RegularGridInterpolator((rho, cos), values)

    def f_hat(points: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(points, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(norms > 0, points[:, 0] / norms, 1.0)
        q = np.column_stack([np.clip(norms, rho[0], rho[-1]), np.clip(c, -1.0, 1.0)])
        return interp(q)

    return f_hat


def harmonic_modulus_check(
    exp: LaplaceExponent,
    d: int,
    r: float,
    cfg: SimConfig,
    grid: Optional[Sequence[Tuple[float, ...]]] = None,
    target: str = "half-space",
    mean_value: bool = True,
    node_paths: Optional[int] = None,
) -> Dict[str, Any]:
    """
    f(x) = P_x(X at exit of B_{4r} lies in F), F = {|z| ≥ 4r, z₁ > 0} (or the
    whole exterior). Reports M = max |f̂(x) − f̂(y)|·φ(|x−y|^{-2})/φ(r^{-2})
    over grid pairs, with paired standard errors, and the mean-value property
    on sub-balls B_ρ(x), ρ = (4r − |x|)/2.
    """
    _check_key(exp, cfg)
    R = 4.0 * r
    grid = [tuple(float(v) for v in p) for p in (grid or default_harmonic_grid(d, r))]
    for p in grid:
        if math.hypot(*p) >= r / 4.0:
            raise PreconditionError(f"grid point {p} is not in B_(r/4)")
    sub = replace(cfg, d=d, ball_radius=R, start_points=tuple(grid))
    result = simulate_exit_batches(sub)
    ind = [_target_indicator(b, target) for b in result.batches]
    n = result.batches[0].n
    f_hat = np.array([v.mean() for v in ind])
    f_se = np.array([v.std(ddof=1) / math.sqrt(n) if n > 1 else np.inf for v in ind])

    scale = float(exp.phi(r**-2.0))
    best = {"M": 0.0, "diff": 0.0, "se": 0.0, "pair": None}
    for i in range(len(grid)):
        for k in range(i + 1, len(grid)):
            dist = math.dist(grid[i], grid[k])
            if dist == 0:
                continue
            diff = ind[i] - ind[k]
            delta = float(abs(diff.mean()))
            se = float(diff.std(ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
            m = delta * float(exp.phi(dist**-2.0)) / scale
            if m >= best["M"]:
                best = {"M": m, "diff": delta, "se": se, "pair": [list(grid[i]), list(grid[k])]}

    report: Dict[str, Any] = {
        "exponent": exp.name, "d": d, "r": r, "target": target, "n_paths": n,
        "grid": [list(p) for p in grid], "f_hat": f_hat.tolist(), "f_std_error": f_se.tolist(),
        "M": best["M"], "max_pair": best["pair"], "max_diff": best["diff"], "max_diff_std_error": best["se"],
        "censored_fraction": result.censored_fraction,
        "assumed_decreasing_densities": True,
    }
    inconclusive = best["diff"] < 3.0 * best["se"]
    report["inconclusive"] = bool(inconclusive and best["diff"] > 0)
    if report["inconclusive"]:
        report["paths_required"] = int(math.ceil(n * (3.0 * best["se"] / best["diff"]) ** 2))

    if mean_value:
        node_paths = node_paths or max(cfg.n_paths // 4, 100)
        f_nodes = _harmonic_nodes(exp, d, R, cfg, target, n_radial=6, n_cos=5, paths=node_paths)
        rows = []
        for i, x in enumerate(grid):
            x_arr = np.asarray(x)
            rho = (R - float(np.linalg.norm(x_arr))) / 2.0
            ball = replace(cfg, d=d, ball_radius=rho, start_points=(_origin(d),))
            batch = simulate_exit_batches(ball).batches[0]
            z = x_arr + np.nan_to_num(batch.exit_position, nan=0.0)
            inside = np.linalg.norm(z, axis=1) < R
            fz = np.where(inside, f_nodes(z), _target_value(z, target))
            fz = np.where(batch.exited, fz, 0.0)
            mv = float(fz.mean())
            mv_se = float(fz.std(ddof=1) / math.sqrt(batch.n)) if batch.n > 1 else float("inf")
            # node interpolant sampling error <= 0.5/sqrt(node_paths)
            node_se = 0.5 / math.sqrt(node_paths) if target != "exterior" else 0.0
            combined = math.sqrt(f_se[i] ** 2 + mv_se**2 + node_se**2)
            rows.append({
                "x": list(x), "sub_radius": rho, "f_hat": float(f_hat[i]), "mean_value": mv,
                "combined_std_error": combined, "ok": abs(float(f_hat[i]) - mv) <= 3.0 * combined + 1e-12,
            })
        report["mean_value_rows"] = rows
        report["mean_value_ok"] = all(row["ok"] for row in rows)
    return report


def harmonic_modulus_sweep(exp: LaplaceExponent, d: int, radii: Sequence[float], cfg: SimConfig, **kwargs: Any) -> Dict[str, Any]:
    """M finite and within a factor 2 across radii."""
    reports = [harmonic_modulus_check(exp, d, float(r), cfg, **kwargs) for r in radii]
    values = [rep["M"] for rep in reports]
    finite = all(math.isfinite(v) for v in values)
    stable_ = finite and min(values) > 0 and max(values) / min(values) <= 2.0
    mean_value_ok = all(rep.get("mean_value_ok", True) for rep in reports)
    return {
        "exponent": exp.name, "d": d, "radii": list(radii), "M": values,
        "stable": bool(stable_), "mean_value_ok": bool(mean_value_ok),
        "inconclusive": any(rep["inconclusive"] for rep in reports),
        "passed": bool(stable_ and mean_value_ok),
        "reports": reports,
    }


# -----------------------------
# Poisson kernel and killed Green differences
# -----------------------------
def default_pairs(d: int, r: float) -> List[Tuple[Tuple[float, ...], Tuple[float, ...]]]:
    e1 = lambda s: (float(s),) + (0.0,) * (d - 1)  # noqa: E731
    e2 = (0.0, r / 10.0) + (0.0,) * (d - 2)
    return [(e1(0.0), e1(r / 16.0)), (e1(-r / 16.0), e1(r / 16.0)), (e1(0.0), e2)]


def _paired_bin_difference(bx: ExitBatch, by: ExitBatch, bins: BinSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and SE of 1[X^x_τ ∈ bin] − 1[X^y_τ ∈ bin] per bin, over paired paths."""
    ix = np.where(bx.exited, bins.locate(np.nan_to_num(bx.exit_position, nan=np.inf)), -1)
    iy = np.where(by.exited, bins.locate(np.nan_to_num(by.exit_position, nan=np.inf)), -1)
    n = bx.n
    px = np.bincount(ix[ix >= 0], minlength=bins.n_bins) / n
    py = np.bincount(iy[iy >= 0], minlength=bins.n_bins) / n
    same = (ix == iy) & (ix >= 0)
    both = np.bincount(ix[same], minlength=bins.n_bins) / n
    mean = px - py
    second = px + py - 2.0 * both
    se = np.sqrt(np.maximum(second - mean**2, 0.0) / max(n - 1, 1))
    return mean, se


def poisson_diff_check(
    exp: LaplaceExponent,
    d: int,
    r: float,
    cfg: SimConfig,
    x_pairs: Optional[Sequence[Tuple[Tuple[float, ...], Tuple[float, ...]]]] = None,
    z_bins: Optional[BinSpec] = None,
) -> Dict[str, Any]:
    """
    Empirical constants C in |K(x,z) − K(y,z)| ≤ C·bound(z) for x, y ∈ B_{r/8}:
    near shell (r < |z| < 2r) bound |z|^{-d}φ((|z|−r)^{-2})/φ(|x−y|^{-2}),
    far (|z| > 2r) bound j(|z|/2)/φ(|x−y|^{-2}). Differences use paired
    paths; 3 SE are subtracted before dividing.
    """
    _check_key(exp, cfg)
    pairs = list(x_pairs) if x_pairs is not None else default_pairs(d, r)
    z_bins = z_bins or BinSpec(d, tuple(np.concatenate([np.linspace(r, 2 * r, 5), [3 * r, 4 * r]]).tolist()), (-1.0, -0.5, 0.0, 0.5, 1.0))
    if z_bins.radial_edges[0] < r:
        raise PreconditionError("z bins must lie outside the ball")
    for x, y in pairs:
        if math.hypot(*x) >= r / 8.0 or math.hypot(*y) >= r / 8.0:
            raise PreconditionError(f"pair {x}, {y} is not in B_(r/8)")

    j = kernel_profile(exp, KernelKind.JUMP_J, d) if exp.family != "drift" else None
    vol = z_bins.volumes()
    norms = np.linalg.norm(z_bins.centers(), axis=1)
    near = norms < 2.0 * r
    rows = []
    c_near, c_far, inconclusive = 0.0, 0.0, False
    for x, y in pairs:
        sub = replace(cfg, d=d, ball_radius=r, start_points=(tuple(x), tuple(y)))
        bx, by = simulate_exit_batches(sub).batches
        mean, se = _paired_bin_difference(bx, by, z_bins)
        diff, diff_se = np.abs(mean) / vol, se / vol
        dist = math.dist(x, y)
        if dist == 0:
            rows.append({"x": list(x), "y": list(y), "max_abs_diff": float(diff.max()), "c_near": 0.0, "c_far": 0.0})
            continue
        denom = float(exp.phi(dist**-2.0))
        bound = np.where(
            near,
            norms ** (-d) * np.asarray(exp.phi(np.maximum(norms - r, 1e-12) ** -2.0)) / denom,
            (np.asarray(j(norms / 2.0)) if j is not None else np.zeros_like(norms)) / denom,
        )
        excess = np.maximum(diff - 3.0 * diff_se, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(bound > 0, excess / bound, np.where(excess > 0, np.inf, 0.0))
        cn = float(ratio[near].max()) if near.any() else 0.0
        cf = float(ratio[~near].max()) if (~near).any() else 0.0
        c_near, c_far = max(c_near, cn), max(c_far, cf)
        inconclusive = inconclusive or bool(np.all(diff <= 3.0 * diff_se))
        rows.append({
            "x": list(x), "y": list(y), "distance": dist, "max_abs_diff": float(diff.max()),
            "c_near": cn, "c_far": cf,
        })
    return {
        "exponent": exp.name, "d": d, "r": r, "n_paths": cfg.n_paths, "bins": z_bins.to_dict(),
        "c_near": c_near, "c_far": c_far, "finite": bool(math.isfinite(c_near) and math.isfinite(c_far)),
        "inconclusive": inconclusive, "rows": rows,
    }


def green_ball_diff_check(
    exp: LaplaceExponent,
    d: int,
    R: float,
    cfg: SimConfig,
    x_pair: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None,
    y_bins: Optional[BinSpec] = None,
) -> Dict[str, Any]:
    """
    |G_{B_R}(x₁, y) − G_{B_R}(x₂, y)| ≤ C·g(s)(1 ∧ |x₁−x₂|/s) with s the
    distance from the y-bin center to the nearer of x₁, x₂ (capped at R/2).
    Occupation differences come from paired paths.
    """
    _check_key(exp, cfg)
    if d < 3:
        raise PreconditionError("the killed-ball Green function needs d >= 3")
    e1 = lambda s: (float(s),) + (0.0,) * (d - 1)  # noqa: E731
    x1, x2 = x_pair or (e1(-R / 8.0), e1(R / 8.0))
    for x in (x1, x2):
        if math.hypot(*x) >= R / 2.0:
            raise PreconditionError(f"{x} is not in B_(R/2)")
    y_bins = y_bins or BinSpec.ball(d, R, n_radial=6, n_cos=4)
    sub = replace(cfg, d=d, ball_radius=R, start_points=(tuple(x1), tuple(x2)))
    result = simulate_exit_batches(sub, bins=y_bins, pair_diffs=True)
    diff = result.pair_occupation[(0, 1)]
    vol = y_bins.volumes()
    delta, se = np.abs(diff.mean) / vol, diff.std_error / vol

    g = kernel_profile(exp, KernelKind.GREEN_G, d)
    centers = y_bins.centers()
    s = np.minimum(np.linalg.norm(centers - np.asarray(x1), axis=1), np.linalg.norm(centers - np.asarray(x2), axis=1))
    s = np.minimum(s, R / 2.0)
    dist = math.dist(x1, x2)
    bound = np.asarray(g(s)) * np.minimum(1.0, dist / s)
    excess = np.maximum(delta - 3.0 * se, 0.0)
    constant = float(np.max(excess / bound))
    return {
        "exponent": exp.name, "d": d, "R": R, "pair": [list(x1), list(x2)],
        "constant": constant, "finite": bool(math.isfinite(constant)),
        "inconclusive": bool(np.all(delta <= 3.0 * se)),
        "max_abs_diff": float(delta.max()), "n_paths": cfg.n_paths,
    }
