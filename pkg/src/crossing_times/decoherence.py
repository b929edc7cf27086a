"""Decoherence functional for the crossing / never-crossing pair of histories."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import NORM_TOL, ConfigurationError, WaveFunction
from .propagation import crossing_propagate, restricted_propagate

__all__ = [
    "CrossingResult",
    "DegenerateFitError",
    "ScalingFit",
    "DecoherenceCheck",
    "crossing_decoherence",
    "small_time_scaling",
    "approximate_decoherence_check",
]


class DegenerateFitError(ValueError):
    """Raised when a log-log fit has too few usable points."""


@dataclass(frozen=True)
class CrossingResult:
    """Reduced 2x2 decoherence functional.

    ``re_D`` and ``abs_D`` refer to the off-diagonal entry
    ``D(c, r) = <Psi_r | Psi_c>``; the other off-diagonal entry is its
    complex conjugate.
    """

    p_nocross: float
    p_cross: float
    re_D: float
    abs_D: float
    tau: float

    @property
    def sum_rule_residual(self) -> float:
        return self.p_nocross + self.p_cross + 2.0 * self.re_D - 1.0

    @property
    def consistency_ratio(self) -> float:
        prod = self.p_nocross * self.p_cross
        return self.abs_D ** 2 / prod if prod > 0 else math.nan


def crossing_decoherence(psi0: WaveFunction, tau: float) -> CrossingResult:
    if not psi0.is_normalized(NORM_TOL):
        raise ConfigurationError("initial state must be normalised")
    if not tau > 0:
        raise ValueError("tau must be positive")
    psi_r = restricted_propagate(psi0, tau).values
    psi_c = crossing_propagate(psi0, tau).values
    dx = psi0.grid.dx
    p_r = float(np.vdot(psi_r, psi_r).real * dx)
    p_c = float(np.vdot(psi_c, psi_c).real * dx)
    d = complex(np.vdot(psi_r, psi_c) * dx)
    return CrossingResult(p_nocross=p_r, p_cross=p_c, re_D=d.real,
                          abs_D=abs(d), tau=float(tau))


@dataclass(frozen=True)
class ScalingFit:
    exponent_cross: float
    exponent_re_D: float
    p_nocross_min_tau: float
    taus: np.ndarray
    results: tuple


_NOISE_FLOOR = 1e-24


def _loglog_slope(t: np.ndarray, y: np.ndarray) -> float:
    slope, _ = np.polyfit(np.log(t), np.log(y), 1)
    return float(slope)


def small_time_scaling(psi0: WaveFunction, taus: Sequence[float],
                       window: Optional[tuple[float, float]] = None) -> ScalingFit:
    """Fit ``p_cross ~ tau**k`` and ``|Re D| ~ tau**k`` over small times.

    Only ``tau`` inside the closed interval ``window`` (all of them when
    ``None``) enter the fit; at least three must remain and each needs
    ``p_cross`` and ``|Re D|`` above rounding noise.
    """
    taus = np.sort(np.asarray(taus, dtype=float))
    if window is not None:
        taus = taus[(taus >= window[0]) & (taus <= window[1])]
    if taus.size < 3:
        raise DegenerateFitError(f"need at least 3 tau values in the fit window, got {taus.size}")
    results = tuple(crossing_decoherence(psi0, t) for t in taus)
    pc = np.array([r.p_cross for r in results])
    rd = np.abs([r.re_D for r in results])
    # squared norms below ~1e-24 are rounding noise of a unit-norm state
    if np.any(pc <= _NOISE_FLOOR) or np.any(rd <= _NOISE_FLOOR):
        raise DegenerateFitError("p_cross or Re D vanished inside the fit window")
    return ScalingFit(exponent_cross=_loglog_slope(taus, pc),
                      exponent_re_D=_loglog_slope(taus, rd),
                      p_nocross_min_tau=results[0].p_nocross,
                      taus=taus, results=results)


@dataclass(frozen=True)
class DecoherenceCheck:
    ratio: float
    passed: bool
    defined: bool


def approximate_decoherence_check(result: CrossingResult,
                                  threshold: float = 0.01) -> DecoherenceCheck:
    """Test ``|D|^2 << p * pbar`` as ``|D|^2 / (p pbar) < threshold``.

    An exactly vanishing ``D`` passes even when the product is zero; otherwise
    a zero product makes the ratio undefined and the check fails.
    """
    prod = result.p_nocross * result.p_cross
    if result.abs_D == 0.0:
        return DecoherenceCheck(0.0, True, True)
    if prod <= 0:
        return DecoherenceCheck(math.nan, False, False)
    ratio = result.abs_D ** 2 / prod
    return DecoherenceCheck(ratio, ratio < threshold, True)
