"""Free, restricted (never cross x = 0) and crossing propagation of 1-D states.

The restricted amplitude uses the method of images: each half of the initial
state is extended to an odd function about x = 0, evolved freely, and cut back
to its own half line. The node at x = 0 belongs to the ``x > 0`` side.
"""
from __future__ import annotations

import enum

import numpy as np

from .core import ConfigurationError, WaveFunction, reflect

__all__ = [
    "PropagationMode",
    "free_propagate",
    "restricted_propagate",
    "crossing_propagate",
    "propagate",
]


class PropagationMode(enum.Enum):
    UNRESTRICTED = "unrestricted"
    RESTRICTED = "restricted"
    CROSSING = "crossing"


def _kinetic_phase(psi: WaveFunction, tau: float) -> np.ndarray:
    p = psi.grid.momenta(psi.hbar)
    return np.exp(-1j * p * p * tau / (2.0 * psi.mass * psi.hbar))


def _evolve(values: np.ndarray, phase: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.fft.fft(values) * phase)


def free_propagate(psi0: WaveFunction, tau: float) -> WaveFunction:
    """Exact free evolution in momentum space."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if tau == 0:
        return psi0
    return psi0.with_values(_evolve(psi0.values, _kinetic_phase(psi0, tau)))


def _sides(psi0: WaveFunction) -> tuple[np.ndarray, np.ndarray]:
    """Indicator arrays for the x >= 0 and x < 0 halves of the grid."""
    g = psi0.grid
    i0 = g.index_of_zero()
    if i0 is None or 2 * i0 != g.n_points:
        raise ConfigurationError(
            "image propagation needs a grid symmetric about a node at x = 0")
    right = np.zeros(g.n_points, dtype=bool)
    right[i0:] = True
    return right, ~right


def restricted_propagate(psi0: WaveFunction, tau: float) -> WaveFunction:
    """Amplitude for paths that never cross x = 0 during ``[0, tau]``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    right, left = _sides(psi0)
    phase = _kinetic_phase(psi0, tau)
    plus = np.where(right, psi0.values, 0)
    minus = np.where(left, psi0.values, 0)
    out_plus = _evolve(plus - reflect(plus), phase)
    out_minus = _evolve(minus - reflect(minus), phase)
    return psi0.with_values(np.where(right, out_plus, out_minus))


def crossing_propagate(psi0: WaveFunction, tau: float) -> WaveFunction:
    """Amplitude for paths that cross x = 0 at least once.

    Built directly from the crossing kernel: the free kernel between points
    on opposite sides, the kernel to the mirror point ``-x`` between points
    on the same side.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    right, left = _sides(psi0)
    phase = _kinetic_phase(psi0, tau)
    u_plus = _evolve(np.where(right, psi0.values, 0), phase)
    u_minus = _evolve(np.where(left, psi0.values, 0), phase)
    out = np.where(right, u_minus + reflect(u_plus), u_plus + reflect(u_minus))
    return psi0.with_values(out)


def propagate(psi0: WaveFunction, tau: float,
              mode: PropagationMode = PropagationMode.UNRESTRICTED) -> WaveFunction:
    if mode is PropagationMode.UNRESTRICTED:
        return free_propagate(psi0, tau)
    if mode is PropagationMode.RESTRICTED:
        return restricted_propagate(psi0, tau)
    return crossing_propagate(psi0, tau)
