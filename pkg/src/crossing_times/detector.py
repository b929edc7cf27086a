"""Irreversible detector in ``x < 0`` and continuous position measurement.

Both candidates evolve a single pure amplitude with Strang splitting: half a
step of position-space damping, an exact free kinetic step in momentum space,
another half step of damping. The detector damps ``x < 0`` at the constant
rate ``gamma_d``; the measurement model damps with the effective potential
obtained by summing the Gaussian measurement weight over positive readings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import log_ndtr

from .core import ConfigurationError, NORM_TOL, PhysParams, WaveFunction, norm_squared

__all__ = [
    "DetectorParams",
    "MeasurementParams",
    "DetectionProbabilities",
    "MethodComparison",
    "detector_evolve",
    "detection_probabilities",
    "effective_potential",
    "measurement_evolve",
    "continuous_measurement_probability",
    "compare_methods",
]


def _steps_for(tau: float, dt: float) -> int:
    n = int(round(tau / dt))
    if n < 1 or abs(n * dt - tau) > 1e-9 * max(tau, 1.0):
        raise ConfigurationError(f"tau = {tau} is not a whole number of steps dt = {dt}")
    return n


@dataclass(frozen=True)
class DetectorParams:
    """Damping rate in ``x < 0`` and the integrator step.

    ``sponge_width`` > 0 adds an extra absorbing layer of that width at both
    grid edges to stop periodic wrap-around; it is off by default because it
    also removes norm that the continuum model would keep.
    """

    gamma_d: float
    dt: float
    sponge_width: float = 0.0
    sponge_rate: float = 0.0

    def __post_init__(self):
        if self.gamma_d < 0:
            raise ConfigurationError("gamma_d must be non-negative")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if self.sponge_width < 0 or self.sponge_rate < 0:
            raise ConfigurationError("sponge parameters must be non-negative")

    def n_steps(self, tau: float) -> int:
        return _steps_for(tau, self.dt)


@dataclass(frozen=True)
class MeasurementParams:
    a: float
    dt: float

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError("measurement strength a must be positive")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")

    def n_steps(self, tau: float) -> int:
        return _steps_for(tau, self.dt)


def _sponge(psi: WaveFunction, width: float, rate: float) -> np.ndarray:
    if width <= 0 or rate <= 0:
        return np.zeros(psi.grid.n_points)
    x = psi.x
    g = psi.grid
    d = np.maximum(g.x_min + width - x, x - (g.x_max - width))
    return rate * np.clip(d / width, 0.0, None) ** 2


def _split_evolve(psi0: WaveFunction, rate: np.ndarray, dt: float, n_steps: int,
                  check_monotone: bool = True) -> WaveFunction:
    """Strang-split evolution; ``rate`` is the amplitude decay rate, applied
    as ``exp(-rate * dt / 2)`` on either side of each kinetic step."""
    p = psi0.grid.momenta(psi0.hbar)
    kin = np.exp(-1j * p * p * dt / (2.0 * psi0.mass * psi0.hbar))
    half = np.exp(-0.5 * rate * dt)
    psi = psi0.values.copy()
    last = np.vdot(psi, psi).real
    for _ in range(n_steps):
        psi = half * np.fft.ifft(kin * np.fft.fft(half * psi))
        if check_monotone:
            now = np.vdot(psi, psi).real
            if now > last * (1 + 1e-12):
                raise FloatingPointError("norm_monotonicity: norm increased during damped evolution")
            last = now
    return psi0.with_values(psi)


def detector_evolve(psi0: WaveFunction, det: DetectorParams, tau: float) -> WaveFunction:
    """Undetected amplitude after ``tau``: Schrodinger evolution with the
    absorbing potential ``-i hbar gamma_d theta(-x) / 2``."""
    # amplitude decays at gamma_d / 2 so probability decays at gamma_d
    rate = 0.5 * det.gamma_d * (psi0.x < 0) + _sponge(psi0, det.sponge_width, det.sponge_rate)
    return _split_evolve(psi0, rate, det.dt, det.n_steps(tau))


@dataclass(frozen=True)
class DetectionProbabilities:
    p_nd: float
    p_d: float


def detection_probabilities(psi0: WaveFunction, det: DetectorParams,
                            tau: float) -> DetectionProbabilities:
    if not psi0.is_normalized(NORM_TOL):
        raise ConfigurationError("initial state must be normalised")
    p_nd = norm_squared(detector_evolve(psi0, det, tau))
    return DetectionProbabilities(p_nd=p_nd, p_d=1.0 - p_nd)


def effective_potential(x, a: float, dt: float):
    """Per-slice potential from summing the measurement weight over readings > 0.

    ``V(x) = -ln(I(x) / I(inf)) / dt`` with
    ``I(x) = int_0^inf exp(-2 a dt (x - u)^2) du``, i.e.
    ``I(x)/I(inf) = Phi(2 x sqrt(a dt))`` for the standard normal CDF ``Phi``.
    Tends to 0 for ``x >> 0``, to ``2 a x^2`` for ``x << 0``, and equals
    ``ln 2 / dt`` at ``x = 0``.
    """
    if not (a > 0 and dt > 0):
        raise ConfigurationError("a and dt must be positive")
    return -log_ndtr(2.0 * np.asarray(x, dtype=float) * math.sqrt(a * dt)) / dt


def measurement_evolve(psi0: WaveFunction, meas: MeasurementParams,
                       tau: float) -> WaveFunction:
    """Amplitude summed over positive measurement records, ``Psi_+``."""
    rate = effective_potential(psi0.x, meas.a, meas.dt)
    return _split_evolve(psi0, rate, meas.dt, meas.n_steps(tau))


def continuous_measurement_probability(psi0: WaveFunction, meas: MeasurementParams,
                                       tau: float) -> float:
    """``p_+ = <Psi_+|Psi_+>``."""
    if not psi0.is_normalized(NORM_TOL):
        raise ConfigurationError("initial state must be normalised")
    return norm_squared(measurement_evolve(psi0, meas, tau))


@dataclass(frozen=True)
class MethodComparison:
    tau: float
    p_nocross_image: float
    re_D: float
    p_nocross_qbm: float
    p_nd: float
    p_plus: float
    gamma_d: float
    a: float
    notes: tuple = ()


def compare_methods(psi0: WaveFunction, params: PhysParams, tau: float,
                    dt: float = 1e-3, a: Optional[float] = None,
                    qbm_support_tol: float = 1e-6) -> MethodComparison:
    """Never-crossing probability from every candidate for one state and ``tau``.

    ``a`` overrides the measurement strength ``params.a``; with thermal
    values of ``D`` the product ``a * dt`` is tiny and every record is
    suppressed, so comparisons usually set it explicitly.

    The decohered (Wigner) column needs the state to live in ``x > 0`` and a
    positive diffusion constant; when either fails it is reported as NaN with
    a note instead of aborting the whole record.
    """
    from .decoherence import crossing_decoherence
    from .fokker_planck import FPKernelParams
    from .wigner import qbm_no_cross_probability

    notes = []
    img = crossing_decoherence(psi0, tau)
    p_qbm = math.nan
    if params.D <= 0:
        notes.append("qbm skipped: D = 0")
    elif psi0.mass_below(0.0) > qbm_support_tol:
        notes.append("qbm skipped: state not supported in x > 0")
    else:
        p_qbm = qbm_no_cross_probability(
            psi0, FPKernelParams(params.m, params.D, tau)).p_nocross
    p_nd = math.nan
    if params.gamma_d > 0:
        p_nd = detection_probabilities(psi0, DetectorParams(params.gamma_d, dt), tau).p_nd
    else:
        notes.append("detector skipped: gamma_d = 0")
    a = params.a if a is None else a
    p_plus = math.nan
    if a > 0:
        p_plus = continuous_measurement_probability(psi0, MeasurementParams(a, dt), tau)
    else:
        notes.append("measurement skipped: a = 0")
    return MethodComparison(tau=tau, p_nocross_image=img.p_nocross, re_D=img.re_D,
                            p_nocross_qbm=p_qbm, p_nd=p_nd, p_plus=p_plus,
                            gamma_d=params.gamma_d, a=a, notes=tuple(notes))
