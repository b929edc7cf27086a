"""Classical probability that a free trajectory ever enters a region.

No clock is used. Each sample of initial data ``(p0, x0)`` labels a whole
straight-line trajectory ``x(t) = x0 + p0 (t - t0) / m`` over all
``t``. The trajectory counts as having entered the region when its total
sojourn time inside the region exceeds a small threshold ``epsilon``.
Sojourn times are computed analytically from line-shape intersections.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .core import ConfigurationError

__all__ = [
    "Disk",
    "Rectangle",
    "RegionSpec",
    "Sampler",
    "TimelessConfig",
    "TimelessEstimate",
    "entry_exit_times",
    "sojourn_time",
    "sample_sojourns",
    "timeless_region_probability",
    "fiducial_shift_check",
    "epsilon_sweep",
    "gaussian_phase_space_sampler",
    "beam_sampler",
]

# sampler(rng, n) -> (p0, x0), each of shape (n, dim)
Sampler = Callable[[np.random.Generator, int], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Disk:
    center: Tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError("disk radius must be positive")
        if len(self.center) != 2:
            raise ConfigurationError("disk centre must be a 2-vector")

    @property
    def dim(self) -> int:
        return 2

    def contains(self, x: np.ndarray) -> np.ndarray:
        r = np.asarray(x, float) - np.asarray(self.center, float)
        return np.einsum("...i,...i->...", r, r) < self.radius ** 2


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned box ``lo < x < hi`` in any dimension."""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigurationError("rectangle corners must be vectors of equal length")
        if not np.all(hi > lo):
            raise ConfigurationError("degenerate rectangle")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, float)
        return np.all((x > np.asarray(self.lo)) & (x < np.asarray(self.hi)), axis=-1)


RegionSpec = Union[Disk, Rectangle]


def _relative_interval(x0: np.ndarray, p0: np.ndarray, region: RegionSpec, m: float):
    """Entry and exit parameters ``s = t - t0`` of the straight line, vectorised.

    Lines that miss the region get an empty interval ``(0, 0)``. Zero
    velocity inside the region gives ``(-inf, inf)``.
    """
    x0 = np.atleast_2d(np.asarray(x0, float))
    v = np.atleast_2d(np.asarray(p0, float)) / m
    if isinstance(region, Disk):
        r = x0 - np.asarray(region.center, float)
        v2 = np.einsum("ij,ij->i", v, v)
        rv = np.einsum("ij,ij->i", r, v)
        cross = r[:, 0] * v[:, 1] - r[:, 1] * v[:, 0]
        # v^2 R^2 - |r x v|^2 avoids cancellation in (r.v)^2 - v^2 (r^2 - R^2)
        disc = v2 * region.radius ** 2 - cross * cross
        with np.errstate(divide="ignore", invalid="ignore"):
            root = np.sqrt(np.maximum(disc, 0.0))
            s_in = (-rv - root) / v2
            s_out = (-rv + root) / v2
        hit = disc > 0
        moving = v2 > 0
        inside = region.contains(x0)
        s_in = np.where(moving, np.where(hit, s_in, 0.0), np.where(inside, -np.inf, 0.0))
        s_out = np.where(moving, np.where(hit, s_out, 0.0), np.where(inside, np.inf, 0.0))
        return s_in, s_out
    lo = np.asarray(region.lo, float)
    hi = np.asarray(region.hi, float)
    if x0.shape[1] != lo.size:
        raise ConfigurationError("phase-space dimension does not match the region")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (lo - x0) / v
        b = (hi - x0) / v
    still = v == 0
    between = (x0 > lo) & (x0 < hi)
    # a still axis allows all s when inside the slab and none otherwise
    lower = np.where(still, np.where(between, -np.inf, np.inf), np.minimum(a, b))
    upper = np.where(still, np.where(between, np.inf, -np.inf), np.maximum(a, b))
    s_in = np.max(lower, axis=1)
    s_out = np.min(upper, axis=1)
    empty = ~(s_out > s_in)
    return np.where(empty, 0.0, s_in), np.where(empty, 0.0, s_out)


def entry_exit_times(x0, p0, region: RegionSpec, m: float = 1.0, t0: float = 0.0):
    """Absolute entry and exit times of the trajectory labelled at ``t0``."""
    s_in, s_out = _relative_interval(x0, p0, region, m)
    return t0 + s_in, t0 + s_out


def sojourn_time(x0, p0, region: RegionSpec, m: float = 1.0):
    """Total time the free trajectory through ``(x0, p0)`` spends in ``region``.

    Accepts a single point (vectors of length ``dim``) or arrays of shape
    ``(n, dim)``. A particle at rest inside the region has infinite sojourn;
    at rest outside it has zero. Grazing lines have zero sojourn.

    The result is a property of the whole trajectory, so it carries no
    fiducial time argument.
    """
    scalar = np.ndim(x0) == 1
    if m <= 0:
        raise ConfigurationError("mass must be positive")
    s_in, s_out = _relative_interval(x0, p0, region, m)
    t = np.maximum(s_out - s_in, 0.0)
    return float(t[0]) if scalar else t


@dataclass(frozen=True)
class TimelessConfig:
    sampler: Sampler
    n_samples: int = 100_000
    epsilon: float = 1e-6
    t0: float = 0.0
    seed: int = 0
    chunk_size: int = 1 << 16
    n_workers: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if self.n_samples < 10_000:
            raise ConfigurationError("n_samples must be at least 1e4")
        if self.chunk_size < 1 or self.n_workers < 1:
            raise ConfigurationError("chunk_size and n_workers must be positive")


@dataclass(frozen=True)
class TimelessEstimate:
    probability: float
    stderr: float
    n_samples: int
    hits: int


def _chunk_plan(cfg: TimelessConfig):
    sizes = [cfg.chunk_size] * (cfg.n_samples // cfg.chunk_size)
    if cfg.n_samples % cfg.chunk_size:
        sizes.append(cfg.n_samples % cfg.chunk_size)
    return list(zip(np.random.SeedSequence(cfg.seed).spawn(len(sizes)), sizes))


def _chunk_sojourns(cfg: TimelessConfig, region: RegionSpec, m: float, seq, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seq))
    p0, x0 = cfg.sampler(rng, n)
    # t0 only relabels entry and exit times, so it never enters the sojourn
    return sojourn_time(x0, p0, region, m)


def sample_sojourns(cfg: TimelessConfig, region: RegionSpec, m: float = 1.0) -> np.ndarray:
    """Per-sample sojourn times of exactly the draws used by the estimator."""
    return np.concatenate([_chunk_sojourns(cfg, region, m, s, n) for s, n in _chunk_plan(cfg)])


def _count_chunk(cfg: TimelessConfig, region: RegionSpec, m: float, seq, n: int,
                 epsilons) -> np.ndarray:
    soj = _chunk_sojourns(cfg, region, m, seq, n)
    return np.array([np.count_nonzero(soj > e) for e in epsilons], dtype=np.int64)


def _count_hits(cfg: TimelessConfig, region: RegionSpec, m: float, epsilons) -> np.ndarray:
    jobs = _chunk_plan(cfg)
    if cfg.n_workers > 1:
        with ThreadPoolExecutor(cfg.n_workers) as ex:
            counts = list(ex.map(lambda j: _count_chunk(cfg, region, m, j[0], j[1], epsilons), jobs))
    else:
        counts = [_count_chunk(cfg, region, m, s, n, epsilons) for s, n in jobs]
    return np.sum(counts, axis=0)


def _estimate(hits: int, n: int) -> TimelessEstimate:
    p = hits / n
    return TimelessEstimate(float(p), math.sqrt(p * (1.0 - p) / n), n, int(hits))


def timeless_region_probability(cfg: TimelessConfig, region: RegionSpec,
                                m: float = 1.0) -> TimelessEstimate:
    """Monte Carlo estimate of the fraction of trajectories with sojourn > epsilon.

    Samples are drawn in fixed-size chunks from independent child seeds, so
    the result does not depend on the number of workers.
    """
    hits = _count_hits(cfg, region, m, [cfg.epsilon])[0]
    return _estimate(hits, cfg.n_samples)


def epsilon_sweep(cfg: TimelessConfig, region: RegionSpec, epsilons,
                  m: float = 1.0) -> list:
    """Estimates on a grid of thresholds from one shared sample set."""
    eps = [float(e) for e in epsilons]
    if any(not e > 0 for e in eps):
        raise ConfigurationError("epsilon values must be positive")
    hits = _count_hits(cfg, region, m, eps)
    return [_estimate(h, cfg.n_samples) for h in hits]


def fiducial_shift_check(cfg: TimelessConfig, region: RegionSpec, m: float = 1.0,
                         shift: float = 0.0) -> float:
    """``|P(t0 + shift) - P(t0)|`` with identical samples."""
    from dataclasses import replace

    a = timeless_region_probability(cfg, region, m)
    b = timeless_region_probability(replace(cfg, t0=cfg.t0 + shift), region, m)
    return abs(b.probability - a.probability)


def gaussian_phase_space_sampler(sigma_p: float, sigma_x: float, p_mean=(0.0, 0.0),
                                 x_mean=(0.0, 0.0)) -> Sampler:
    """Independent isotropic Gaussians in momentum and position."""
    pm = np.asarray(p_mean, float)
    xm = np.asarray(x_mean, float)
    if pm.shape != xm.shape:
        raise ConfigurationError("mean vectors must have equal length")
    if not (sigma_p > 0 and sigma_x > 0):
        raise ConfigurationError("widths must be positive")

    def sample(rng: np.random.Generator, n: int):
        p = pm + sigma_p * rng.standard_normal((n, pm.size))
        x = xm + sigma_x * rng.standard_normal((n, xm.size))
        return p, x

    return sample


def beam_sampler(target, impact: float, speed: float = 1.0, distance: float = 10.0,
                 spread: float = 0.0) -> Sampler:
    """Parallel beam in the plane travelling in +x towards ``target``.

    Starts a ``distance`` to the left of the target with lateral offset
    ``impact`` (plus uniform jitter of half-width ``spread``).
    """
    c = np.asarray(target, float)

    def sample(rng: np.random.Generator, n: int):
        x = np.empty((n, 2))
        x[:, 0] = c[0] - distance
        x[:, 1] = c[1] + impact + spread * rng.uniform(-1.0, 1.0, n)
        p = np.zeros((n, 2))
        p[:, 0] = speed
        return p, x

    return sample
