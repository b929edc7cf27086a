"""Dissipationless Fokker-Planck kernels for a free Brownian particle.

``K`` is the free phase-space propagator, ``K_r`` its counterpart for paths
that stay in ``x > 0`` built from the two-sheeted (period 4 pi) multiform
Green function. Survival probabilities are computed by nested Gauss-Legendre
quadrature over the final point and by grid sums over the initial density.
A Langevin Monte Carlo engine provides an independent estimate.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numba
import numpy as np
from scipy.special import erfc

from .core import ConfigurationError, PhaseSpaceDistribution

__all__ = [
    "FPKernelParams",
    "CarslawCoords",
    "SurvivalEstimate",
    "CrossingProbabilities",
    "fp_propagator",
    "carslaw_coords",
    "carslaw_green",
    "restricted_fp_propagator",
    "survival_from_point",
    "classical_no_cross_probability",
    "classical_cross_probability",
    "first_passage_times",
    "langevin_first_passage",
    "langevin_survival_curve",
    "point_sampler",
    "gaussian_sampler",
]

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class FPKernelParams:
    m: float
    D: float
    tau: float

    def __post_init__(self):
        if not (self.m > 0 and self.D > 0 and self.tau > 0):
            raise ConfigurationError("m, D and tau must all be positive")

    @property
    def alpha(self) -> float:
        return 1.0 / (self.D * self.tau)

    @property
    def beta(self) -> float:
        return 3.0 * self.m ** 2 / (self.D * self.tau ** 3)

    @property
    def epsilon(self) -> float:
        return 3.0 * self.m / (self.D * self.tau ** 2)

    @property
    def N(self) -> float:
        """Normalisation ``(3 m^2 / (4 pi^2 D^2 tau^4))**0.5`` of the kernel."""
        return math.sqrt(3.0 * self.m ** 2 / (4.0 * math.pi ** 2 * self.D ** 2 * self.tau ** 4))

    @property
    def reduced_time(self) -> float:
        return self.D * self.tau / self.m ** 2

    @property
    def sigma_p(self) -> float:
        return math.sqrt(2.0 * self.D * self.tau)

    @property
    def sigma_x(self) -> float:
        """Position spread of the kernel, ``(2 D tau^3 / (3 m^2))**0.5``."""
        return math.sqrt(2.0 * self.D * self.tau ** 3 / (3.0 * self.m ** 2))

    def at(self, tau: float) -> "FPKernelParams":
        return FPKernelParams(self.m, self.D, tau)


def fp_propagator(p, x, p0, x0, params: FPKernelParams):
    """Free Fokker-Planck transition density ``K(p, x, tau | p0, x0, 0)``."""
    u = np.asarray(p) - p0
    v = np.asarray(x) - x0 - p0 * params.tau / params.m
    q = params.alpha * u * u + params.beta * v * v - params.epsilon * u * v
    return params.N * np.exp(-q)


@dataclass(frozen=True)
class CarslawCoords:
    """Polar form of the rotated phase-space coordinates.

    ``theta`` lies in ``[0, pi]`` for ``x >= 0``. The physical initial half
    plane ``x0 > 0`` maps onto ``theta0`` in ``(2 pi/3, 5 pi/3)``, so
    ``theta0`` is reported in ``[0, 2 pi)`` and never wrapped further.
    """

    r: np.ndarray
    theta: np.ndarray
    r0: np.ndarray
    theta0: np.ndarray
    t_reduced: float


def carslaw_coords(p, x, p0, x0, params: FPKernelParams) -> CarslawCoords:
    m, tau = params.m, params.tau
    X = np.asarray(p) / m - 1.5 * np.asarray(x) / tau
    Y = SQRT3 * np.asarray(x) / (2.0 * tau)
    X0 = -np.asarray(p0) / (2.0 * m) - 1.5 * np.asarray(x0) / tau
    Y0 = 0.5 * SQRT3 * (np.asarray(p0) / m + np.asarray(x0) / tau)
    return CarslawCoords(
        r=np.hypot(X, Y), theta=np.arctan2(Y, X),
        r0=np.hypot(X0, Y0), theta0=np.mod(np.arctan2(Y0, X0), 2.0 * np.pi),
        t_reduced=params.reduced_time)


def carslaw_green(r, theta, r0, theta0, t_reduced):
    """Multiform Green function, period 4 pi in ``theta - theta0``.

    Uses the literal normalisation ``sqrt(3) / (2 pi^(3/2) t^2)``; the
    integral of ``exp(-lambda^2)`` up to ``a`` is ``sqrt(pi) erfc(-a) / 2``.
    """
    dth = np.asarray(theta) - np.asarray(theta0)
    rr = np.asarray(r) * np.asarray(r0)
    a = 2.0 * np.sqrt(rr / t_reduced) * np.cos(0.5 * dth)
    expo = -(np.asarray(r) ** 2 + np.asarray(r0) ** 2 - 2.0 * rr * np.cos(dth)) / t_reduced
    pref = SQRT3 / (2.0 * math.pi ** 1.5 * t_reduced ** 2)
    return pref * np.exp(expo) * 0.5 * math.sqrt(math.pi) * erfc(-a)


def _density_factor(params: FPKernelParams) -> float:
    # carslaw_green's prefactor equals the (p, x) density only when
    # D = m = tau = 1; this rescales it to N * (plain Gaussian factor).
    t = params.reduced_time
    return params.N / (SQRT3 / (2.0 * math.pi * t * t))


def restricted_fp_propagator(p, x, p0, x0, params: FPKernelParams):
    """Kernel for paths that stay in ``x > 0``: ``g(theta0) - g(-theta0)``.

    Vanishes identically on ``x = 0, p > 0`` (``theta = 0``). Returned as a
    density in ``(p, x)``.
    """
    if np.any(np.asarray(x) < 0) or np.any(np.asarray(x0) < 0):
        raise ValueError("restricted kernel is defined for x >= 0 and x0 >= 0 only")
    c = carslaw_coords(p, x, p0, x0, params)
    g_direct = carslaw_green(c.r, c.theta, c.r0, c.theta0, c.t_reduced)
    g_image = carslaw_green(c.r, c.theta, c.r0, -c.theta0, c.t_reduced)
    return _density_factor(params) * (g_direct - g_image)


# --------------------------------------------------------------------------
# quadrature

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _mapped_nodes(a, b, n):
    """Gauss-Legendre nodes/weights on ``[a_i, b_i]`` for arrays of intervals."""
    t, w = _gauss_legendre(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def survival_from_point(p0, x0, params: FPKernelParams, n_nodes: int = 32,
                        span: float = 7.0, skip_sigmas: float = 10.0,
                        chunk: int = 256) -> np.ndarray:
    """``int dp int_{x>0} dx K_r(p, x, tau | p0, x0)`` for arrays of starts.

    The final-point box is centred on the deterministic end point and spans
    ``span`` kernel standard deviations; the momentum range is split at
    ``p = 0`` where ``K_r(p, 0)`` has a kink. Starts whose drift line stays
    more than ``skip_sigmas`` position spreads away from x = 0 survive with
    probability 1 and are not integrated.
    """
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    p0, x0 = np.broadcast_arrays(p0, x0)
    shape = p0.shape
    p0 = p0.ravel()
    x0 = x0.ravel()
    out = np.ones(p0.size)
    sp, sx = params.sigma_p, params.sigma_x
    closest = x0 + np.minimum(0.0, p0 * params.tau / params.m)
    todo = np.nonzero(closest <= skip_sigmas * sx)[0]
    for s in range(0, todo.size, chunk):
        idx = todo[s:s + chunk]
        a0, b0 = p0[idx], x0[idx]
        xc = b0 + a0 * params.tau / params.m
        x_lo = np.maximum(0.0, xc - span * sx)
        x_hi = np.maximum(xc + span * sx, x_lo + sx)
        total = np.zeros(a0.size)
        for p_lo, p_hi in ((a0 - span * sp, np.minimum(0.0, a0 + span * sp)),
                           (np.maximum(0.0, a0 - span * sp), a0 + span * sp)):
            ok = p_hi > p_lo
            if not ok.any():
                continue
            pn, pw = _mapped_nodes(np.where(ok, p_lo, 0), np.where(ok, p_hi, 1), n_nodes)
            xn, xw = _mapped_nodes(x_lo, x_hi, n_nodes)
            P = pn[:, :, None]
            X = xn[:, None, :]
            k = restricted_fp_propagator(P, X, a0[:, None, None], b0[:, None, None], params)
            val = np.einsum("ij,ijk,ik->i", pw, k, xw)
            total += np.where(ok, val, 0.0)
        out[idx] = total
    return out.reshape(shape)


def _support_weights(w0: PhaseSpaceDistribution, tol: float, rel_cut: float):
    x = w0.x_grid.points
    below = w0.mass_below(0.0)
    if abs(below) > tol:
        raise ConfigurationError(
            f"initial density has weight {below:.3g} at x <= 0 (tolerance {tol:g})")
    vals = np.where(x[None, :] > 0, w0.values, 0.0)
    mask = np.abs(vals) > rel_cut * np.abs(vals).max()
    ip, ix = np.nonzero(mask)
    return (w0.p_grid.points[ip], x[ix], vals[ip, ix] * w0.cell, below)


def classical_no_cross_probability(w0: PhaseSpaceDistribution,
                                   params: FPKernelParams, support_tol: float = 1e-8,
                                   rel_cut: float = 1e-13, n_nodes: int = 32) -> float:
    """Probability of never reaching x = 0 during ``[0, tau]``."""
    p0, x0, weight, _ = _support_weights(w0, support_tol, rel_cut)
    return float(np.dot(survival_from_point(p0, x0, params, n_nodes=n_nodes), weight))


@dataclass(frozen=True)
class CrossingProbabilities:
    p_cross: float
    p_nocross: float
    p_cross_flux: float


def _boundary_flux(p0, x0, params: FPKernelParams, n_t: int, n_p: int) -> np.ndarray:
    """``int_0^tau dt int_{p<0} dp |p|/m K_r(p, 0, t | p0, x0)`` per start."""
    tn, tw = _gauss_legendre(n_t)
    times = 0.5 * params.tau * (tn + 1.0)
    tw = 0.5 * params.tau * tw
    out = np.zeros(np.size(p0))
    for t, wt in zip(times, tw):
        kp = params.at(t)
        span = 9.0 * kp.sigma_p
        lo = np.minimum(p0 - span, -1e-300)
        pn, pw = _mapped_nodes(lo, np.zeros_like(lo), n_p)
        k = restricted_fp_propagator(pn, np.zeros_like(pn), p0[:, None], x0[:, None], kp)
        out += wt * np.sum(pw * (-pn / params.m) * k, axis=1)
    return out


def classical_cross_probability(w0: PhaseSpaceDistribution, params: FPKernelParams,
                                support_tol: float = 1e-8, rel_cut: float = 1e-13,
                                n_nodes: int = 32, n_t: int = 64) -> CrossingProbabilities:
    """Crossing probability ``1 - p_r`` plus the boundary-flux estimate.

    The flux estimate integrates the outgoing current ``|p|/m K_r`` through
    ``x = 0`` over momenta ``p < 0`` and over the whole interval.
    """
    p0, x0, weight, _ = _support_weights(w0, support_tol, rel_cut)
    p_r = float(np.dot(survival_from_point(p0, x0, params, n_nodes=n_nodes), weight))
    flux = float(np.dot(_boundary_flux(p0, x0, params, n_t, n_nodes), weight))
    return CrossingProbabilities(p_cross=1.0 - p_r, p_nocross=p_r, p_cross_flux=flux)


# --------------------------------------------------------------------------
# Langevin Monte Carlo

Sampler = Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray]]


def point_sampler(p0: float, x0: float) -> Sampler:
    def sample(rng, n):
        return np.full(n, float(p0)), np.full(n, float(x0))
    return sample


def gaussian_sampler(p0: float, x0: float, sigma_p: float, sigma_x: float) -> Sampler:
    """Independent normal momenta and positions, positions redrawn until > 0."""
    def sample(rng, n):
        p = p0 + sigma_p * rng.standard_normal(n)
        x = x0 + sigma_x * rng.standard_normal(n)
        bad = x <= 0
        while bad.any():
            x[bad] = x0 + sigma_x * rng.standard_normal(int(bad.sum()))
            bad = x <= 0
        return p, x
    return sample


@numba.njit(cache=True, nogil=True)
def _cubic_at(xa, va, c2, c3, s):
    return xa + s * (va + s * (c2 + s * c3))


@numba.njit(cache=True, nogil=True)
def _hermite_dips_below_zero(xa, xb, va, vb, h):
    # cubic Hermite interpolant through (0, xa, va) and (h, xb, vb); it never
    # falls below min(xa, xb) - 4h/27 (|va| + |vb|)
    if min(xa, xb) > 4.0 * h / 27.0 * (abs(va) + abs(vb)):
        return False
    c2 = (3.0 * (xb - xa) / h - 2.0 * va - vb) / h
    c3 = (va + vb - 2.0 * (xb - xa) / h) / (h * h)
    qa = 3.0 * c3
    qb = 2.0 * c2
    if abs(qa) < 1e-300:
        if qb == 0.0:
            return False
        s = -va / qb
        return 0.0 < s < h and _cubic_at(xa, va, c2, c3, s) <= 0.0
    disc = qb * qb - 4.0 * qa * va
    if disc < 0.0:
        return False
    sq = math.sqrt(disc)
    s1 = (-qb - sq) / (2.0 * qa)
    s2 = (-qb + sq) / (2.0 * qa)
    if 0.0 < s1 < h and _cubic_at(xa, va, c2, c3, s1) <= 0.0:
        return True
    return 0.0 < s2 < h and _cubic_at(xa, va, c2, c3, s2) <= 0.0


@numba.njit(cache=True, nogil=True)
def _first_passage_kernel(rng, p0, x0, m, noise, dt, n_steps, bridge):
    n = p0.size
    out = np.full(n, np.inf)
    for i in range(n):
        p = p0[i]
        x = x0[i]
        if x <= 0.0:
            out[i] = 0.0
            continue
        for k in range(n_steps):
            x_new = x + p / m * dt
            p_new = p + noise * rng.standard_normal()
            if x_new <= 0.0 or (bridge and p < 0.0 and
                                _hermite_dips_below_zero(x, x_new, p / m, p_new / m, dt)):
                out[i] = (k + 1) * dt
                break
            x = x_new
            p = p_new
    return out


def first_passage_times(p0: np.ndarray, x0: np.ndarray, m: float, D: float,
                        t_max: float, dt: float, rng: np.random.Generator,
                        bridge: bool = False) -> np.ndarray:
    """Euler-Maruyama first-passage times to ``x <= 0``; ``inf`` if none by ``t_max``.

    Integrates ``dx = p/m dt``, ``dp = sqrt(2 D) dW``. With ``bridge`` the
    cubic Hermite curve through consecutive states is also checked, which
    catches excursions below zero that start and end inside one step.
    """
    n_steps = int(round(t_max / dt))
    if abs(n_steps * dt - t_max) > 1e-9 * t_max:
        raise ValueError("t_max must be an integer multiple of dt")
    return _first_passage_kernel(rng, np.ascontiguousarray(p0, dtype=float),
                                 np.ascontiguousarray(x0, dtype=float), float(m),
                                 math.sqrt(2.0 * D * dt), float(dt), n_steps, bool(bridge))


@dataclass(frozen=True)
class SurvivalEstimate:
    survival: float
    stderr: float
    n_paths: int


def _chunked_first_passage(sampler: Sampler, m, D, t_max, n_paths, dt, seed,
                           bridge, n_workers, chunk_size):
    n_chunks = -(-n_paths // chunk_size)
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk_size, n_paths - i * chunk_size) for i in range(n_chunks)]

    def work(i):
        rng = np.random.default_rng(seeds[i])
        p, x = sampler(rng, sizes[i])
        return first_passage_times(p, x, m, D, t_max, dt, rng, bridge)

    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(work, range(n_chunks)))
    else:
        parts = [work(i) for i in range(n_chunks)]
    return np.concatenate(parts)


def langevin_survival_curve(sampler: Sampler, m: float, D: float,
                            taus: Sequence[float], n_paths: int, dt: float,
                            seed: int, bridge: bool = False, n_workers: int = 1,
                            chunk_size: int = 1 << 16):
    """Survival fractions and binomial standard errors at each time in ``taus``.

    A single ensemble is run to ``max(taus)``. Results depend only on
    ``seed`` and ``chunk_size``, not on ``n_workers``.
    """
    taus = np.asarray(taus, dtype=float)
    fpt = _chunked_first_passage(sampler, m, D, float(taus.max()), n_paths, dt,
                                 seed, bridge, n_workers, chunk_size)
    s = np.array([(fpt > t + 0.5 * dt).mean() for t in taus])
    return s, np.sqrt(s * (1 - s) / n_paths)


def langevin_first_passage(sampler: Sampler, params: FPKernelParams, n_paths: int,
                           dt: float, seed: int, bridge: bool = False,
                           n_workers: int = 1) -> SurvivalEstimate:
    s, se = langevin_survival_curve(sampler, params.m, params.D, [params.tau],
                                    n_paths, dt, seed, bridge, n_workers)
    return SurvivalEstimate(float(s[0]), float(se[0]), int(n_paths))
