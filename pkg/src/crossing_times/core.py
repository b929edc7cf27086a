"""Grids, wave functions, phase-space densities and physical parameters.

Conventions used throughout the package:

* position grids are periodic and uniform, ``x_i = x_min + i*dx`` with
  ``dx = (x_max - x_min)/n``; the right end point is excluded;
* the continuous Fourier transform is approximated as
  ``psi(p) = (2*pi*hbar)**-0.5 * sum_i dx * psi_i * exp(-i p x_i / hbar)``
  so that ``sum |psi(p)|**2 dp == sum |psi(x)|**2 dx`` exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "ConfigurationError",
    "Grid1D",
    "WaveFunction",
    "GaussianPacketSpec",
    "PhaseSpaceDistribution",
    "PhysParams",
    "make_gaussian",
    "odd_superposition",
    "norm_squared",
    "reflect",
    "to_momentum",
    "expectation_x",
    "expectation_p",
    "uncertainty_product",
]

NORM_TOL = 1e-10
PHASE_SPACE_NORM_TOL = 1e-6


class ConfigurationError(ValueError):
    """Raised when a grid, state or parameter set is unusable."""


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[x_min, x_max)`` with ``n_points`` nodes."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not _is_power_of_two(int(self.n_points)):
            raise ConfigurationError(
                f"n_points must be a power of two >= 2, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ConfigurationError("x_max must exceed x_min")

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "Grid1D":
        """Grid on ``[-half_width, half_width)``; x = 0 is node ``n_points//2``."""
        return cls(-float(half_width), float(half_width), int(n_points))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights of the periodic rectangle rule."""
        return np.full(self.n_points, self.dx)

    def index_of_zero(self) -> Optional[int]:
        """Index of the node sitting exactly at x = 0, or None."""
        k = -self.x_min / self.dx
        i = int(round(k))
        if abs(k - i) > 1e-9 or not 0 <= i < self.n_points:
            return None
        return i

    def momenta(self, hbar: float = 1.0) -> np.ndarray:
        """Momentum values in FFT order."""
        return 2.0 * np.pi * hbar * np.fft.fftfreq(self.n_points, d=self.dx)

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n_points * factor)


@dataclass(frozen=True)
class PhysParams:
    """Physical constants; ``D`` and ``a`` are derived, never stored."""

    m: float = 1.0
    hbar: float = 1.0
    gamma: float = 0.0
    kT: float = 0.0
    gamma_d: float = 0.0

    def __post_init__(self):
        if self.m <= 0 or self.hbar <= 0:
            raise ConfigurationError("m and hbar must be positive")
        if self.gamma < 0 or self.kT < 0 or self.gamma_d < 0:
            raise ConfigurationError("gamma, kT and gamma_d must be non-negative")

    @property
    def D(self) -> float:
        """Momentum diffusion constant ``2 m gamma kT``."""
        return 2.0 * self.m * self.gamma * self.kT

    @property
    def a(self) -> float:
        """Position-measurement strength ``D / hbar**2``."""
        return self.D / self.hbar ** 2

    @classmethod
    def from_diffusion(cls, D: float, m: float = 1.0, hbar: float = 1.0,
                       gamma: float = 1.0, gamma_d: float = 0.0) -> "PhysParams":
        """Pick ``kT`` so that the derived diffusion equals ``D``."""
        return cls(m=m, hbar=hbar, gamma=gamma, kT=D / (2.0 * m * gamma),
                   gamma_d=gamma_d)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex amplitude sampled on a :class:`Grid1D`."""

    grid: Grid1D
    values: np.ndarray
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"values have shape {v.shape}, grid has {self.grid.n_points} points")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "WaveFunction":
        return WaveFunction(self.grid, values, self.hbar, self.mass)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(norm_squared(self) - 1.0) <= tol

    def normalized(self) -> "WaveFunction":
        n = norm_squared(self)
        if n == 0:
            raise ConfigurationError("cannot normalize the zero wave function")
        return self.with_values(self.values / np.sqrt(n))

    def edge_amplitude(self) -> float:
        return float(max(abs(self.values[0]), abs(self.values[-1])))

    def mass_below(self, x0: float = 0.0, inclusive: bool = True) -> float:
        """Probability weight at ``x <= x0`` (or ``x < x0``)."""
        x = self.x
        sel = x <= x0 if inclusive else x < x0
        return float(np.sum(np.abs(self.values[sel]) ** 2) * self.grid.dx)


@dataclass(frozen=True)
class GaussianPacketSpec:
    """Minimum-uncertainty packet centred at ``x0`` with mean momentum ``p0``."""

    x0: float
    p0: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")


def make_gaussian(spec: GaussianPacketSpec, grid: Grid1D,
                  params: PhysParams = PhysParams(),
                  edge_tol: float = 1e-12) -> WaveFunction:
    """Sample ``(2 pi s^2)^(-1/4) exp(-(x-x0)^2/(4 s^2) + i p0 x/hbar)``.

    The samples are renormalised on the grid so that the discrete norm is 1
    to rounding. Raises :class:`ConfigurationError` if the packet is not
    negligible at the grid edges.
    """
    x = grid.points
    s = spec.sigma
    psi = (2 * np.pi * s * s) ** -0.25 * np.exp(
        -(x - spec.x0) ** 2 / (4 * s * s) + 1j * spec.p0 * x / params.hbar)
    wf = WaveFunction(grid, psi, params.hbar, params.m)
    if wf.edge_amplitude() > edge_tol:
        raise ConfigurationError(
            f"packet leaks past the grid edge (|psi| = {wf.edge_amplitude():.3g})")
    return wf.normalized()


def odd_superposition(spec: GaussianPacketSpec, grid: Grid1D,
                      params: PhysParams = PhysParams()) -> WaveFunction:
    """Normalised ``phi(x) - phi(-x)`` for the packet ``phi`` given by ``spec``.

    The reflection is done on grid indices (``i -> -i mod n`` about the node at
    x = 0), so the result is antisymmetric to the last bit.
    """
    i0 = grid.index_of_zero()
    if i0 is None or 2 * i0 != grid.n_points:
        raise ConfigurationError("odd superposition needs a symmetric grid")
    phi = make_gaussian(spec, grid, params).values
    return WaveFunction(grid, phi - reflect(phi), params.hbar, params.m).normalized()


def reflect(values: np.ndarray) -> np.ndarray:
    """``f(x) -> f(-x)`` on a symmetric periodic grid."""
    return np.roll(values[::-1], 1)


def norm_squared(psi: WaveFunction) -> float:
    """``sum |psi_i|^2 dx`` (rectangle rule, exact for periodic band-limited data)."""
    return float(np.sum(np.abs(psi.values) ** 2) * psi.grid.dx)


def to_momentum(psi: WaveFunction) -> tuple[np.ndarray, np.ndarray]:
    """Momentum amplitude, returned as ``(p, psi_p)`` sorted by increasing p."""
    g = psi.grid
    p = g.momenta(psi.hbar)
    phase = np.exp(-1j * p * g.x_min / psi.hbar)
    amp = g.dx * phase * np.fft.fft(psi.values) / np.sqrt(2 * np.pi * psi.hbar)
    order = np.argsort(p)
    return p[order], amp[order]


def expectation_x(psi: WaveFunction) -> float:
    rho = np.abs(psi.values) ** 2
    return float(np.sum(psi.x * rho) / np.sum(rho))


def expectation_p(psi: WaveFunction) -> float:
    p, amp = to_momentum(psi)
    rho = np.abs(amp) ** 2
    return float(np.sum(p * rho) / np.sum(rho))


def uncertainty_product(psi: WaveFunction) -> float:
    """``Delta x * Delta p`` computed from the position and momentum densities."""
    rho = np.abs(psi.values) ** 2
    rho = rho / rho.sum()
    mx = np.sum(psi.x * rho)
    dx2 = np.sum((psi.x - mx) ** 2 * rho)
    p, amp = to_momentum(psi)
    w = np.abs(amp) ** 2
    w = w / w.sum()
    mp = np.sum(p * w)
    dp2 = np.sum((p - mp) ** 2 * w)
    return float(np.sqrt(dx2 * dp2))


@dataclass(frozen=True, eq=False)
class PhaseSpaceDistribution:
    """Real density on a ``(p, x)`` product grid, ``values[i_p, i_x]``."""

    p_grid: Grid1D
    x_grid: Grid1D
    values: np.ndarray
    classical: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.p_grid.n_points, self.x_grid.n_points):
            raise ConfigurationError("values do not match the (p, x) grid shape")
        if self.classical and np.any(v < 0):
            raise ConfigurationError("classical densities must be non-negative")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def cell(self) -> float:
        return self.p_grid.dx * self.x_grid.dx

    def total(self) -> float:
        return float(self.values.sum() * self.cell)

    def position_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.p_grid.dx

    def momentum_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.x_grid.dx

    def mass_below(self, x0: float = 0.0) -> float:
        """Signed weight carried by nodes with ``x <= x0``."""
        sel = self.x_grid.points <= x0
        return float(self.values[:, sel].sum() * self.cell)

    @classmethod
    def gaussian(cls, p_grid: Grid1D, x_grid: Grid1D, p0: float, x0: float,
                 sigma_p: float, sigma_x: float, rho: float = 0.0
                 ) -> "PhaseSpaceDistribution":
        """Bivariate normal density sampled on the grid (not renormalised)."""
        P, X = np.meshgrid(p_grid.points, x_grid.points, indexing="ij")
        u = (P - p0) / sigma_p
        v = (X - x0) / sigma_x
        q = (u * u - 2 * rho * u * v + v * v) / (1 - rho * rho)
        w = np.exp(-0.5 * q) / (2 * np.pi * sigma_p * sigma_x * np.sqrt(1 - rho * rho))
        return cls(p_grid, x_grid, w)
