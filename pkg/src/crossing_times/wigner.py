"""Wigner transform of pure states and the environment-decohered crossing
probability obtained by feeding the Wigner function through the restricted
Fokker-Planck kernel."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ConfigurationError, Grid1D, PhaseSpaceDistribution, WaveFunction
from .fokker_planck import FPKernelParams, survival_from_point

__all__ = [
    "WignerFunction",
    "QBMResult",
    "wigner_transform",
    "wigner_momentum_grid",
    "qbm_no_cross_probability",
    "transport_free",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WignerFunction(PhaseSpaceDistribution):
    source: Optional[WaveFunction] = field(default=None, repr=False)

    def __init__(self, p_grid, x_grid, values, source=None):
        super().__init__(p_grid, x_grid, values, classical=False)
        object.__setattr__(self, "source", source)


def wigner_momentum_grid(grid: Grid1D, hbar: float = 1.0) -> Grid1D:
    """Momentum grid of the transform: ``2n`` nodes spanning ``+-pi hbar / dx``."""
    p_max = np.pi * hbar / grid.dx
    return Grid1D(-p_max, p_max, 2 * grid.n_points)


def wigner_transform(psi: WaveFunction) -> WignerFunction:
    """``W(p, x) = (2 pi hbar)^-1 int dxi exp(-i p xi/hbar) psi(x+xi/2) psi*(x-xi/2)``.

    The state is first interpolated spectrally to half-step resolution so that
    ``x +- xi/2`` are nodes for every ``xi = k dx``; ``k`` runs over
    ``[-n, n)`` so all separations on the grid are included. Amplitude beyond
    the grid is taken as zero (no periodic wrap).
    """
    g = psi.grid
    n = g.n_points
    coef = np.fft.fft(psi.values)
    padded = np.zeros(2 * n, dtype=complex)
    padded[: n // 2] = coef[: n // 2]
    padded[-n // 2:] = coef[-n // 2:]
    # split the Nyquist bin so that the interpolant stays real-symmetric
    padded[n // 2] = 0.5 * coef[n // 2]
    padded[-n // 2] = 0.5 * coef[n // 2]
    fine = 2.0 * np.fft.ifft(padded)
    fine_ext = np.concatenate([fine, np.zeros(2 * n, dtype=complex)])

    k = np.arange(-n, n)
    centres = 2 * np.arange(n)
    plus = centres[:, None] + k[None, :]
    minus = centres[:, None] - k[None, :]
    inside = (plus >= 0) & (plus < 2 * n) & (minus >= 0) & (minus < 2 * n)
    corr = np.where(inside, fine_ext[np.clip(plus, 0, 4 * n - 1)]
                    * np.conj(fine_ext[np.clip(minus, 0, 4 * n - 1)]), 0)
    # sum_k exp(-i p_j k dx / hbar) corr[:, k] with p_j = (j - n) pi hbar/(n dx)
    # and k - n ranging over [-n, n) -> FFT over the shifted index
    shifted = np.fft.ifftshift(corr, axes=1)
    W = np.fft.fftshift(np.fft.fft(shifted, axis=1), axes=1)
    W = W * g.dx / (2 * np.pi * psi.hbar)
    imag = np.max(np.abs(W.imag)) if W.size else 0.0
    if imag > 1e-10 * max(1.0, np.max(np.abs(W.real))):
        log.warning("Wigner transform has imaginary residue %.3g", imag)
    return WignerFunction(wigner_momentum_grid(g, psi.hbar), g, W.real.T, psi)


@dataclass(frozen=True)
class QBMResult:
    p_nocross: float
    raw: float
    clipped_mass: float
    min_wigner: float

    @property
    def p_cross(self) -> float:
        return 1.0 - self.p_nocross


def qbm_no_cross_probability(psi0: WaveFunction, params: FPKernelParams,
                             support_tol: float = 1e-6, rel_cut: float = 1e-12,
                             n_nodes: int = 32) -> QBMResult:
    """Never-crossing probability with the Wigner function as initial density.

    Negative Wigner values are integrated as they are; only the final value
    is clamped to ``[0, 1]`` (the unclamped value is kept in ``raw``).
    """
    below = psi0.mass_below(0.0)
    if below > support_tol:
        raise ConfigurationError(
            f"initial state has probability {below:.3g} at x <= 0 (tolerance {support_tol:g})")
    W = wigner_transform(psi0)
    x = W.x_grid.points
    vals = np.where(x[None, :] > 0, W.values, 0.0)
    clipped = float(W.values[:, x <= 0].sum() * W.cell)
    mask = np.abs(vals) > rel_cut * np.abs(vals).max()
    ip, ix = np.nonzero(mask)
    surv = survival_from_point(W.p_grid.points[ip], x[ix], params, n_nodes=n_nodes)
    raw = float(np.dot(surv, vals[ip, ix]) * W.cell)
    value = min(1.0, max(0.0, raw))
    if value != raw:
        log.info("qbm no-cross probability clamped from %.6g", raw)
    return QBMResult(p_nocross=value, raw=raw, clipped_mass=clipped,
                     min_wigner=float(W.values.min()))


def transport_free(W: PhaseSpaceDistribution, t: float, m: float = 1.0) -> np.ndarray:
    """Values of ``W(p, x - p t/m)`` on W's own grid (free classical flow).

    Each momentum row is shifted with a Fourier phase, which is exact for
    rows that are band-limited on the periodic position grid.
    """
    xg = W.x_grid
    k = 2 * np.pi * np.fft.fftfreq(xg.n_points, d=xg.dx)
    shift = W.p_grid.points[:, None] * t / m
    return np.fft.ifft(np.fft.fft(W.values, axis=1) * np.exp(-1j * k[None, :] * shift),
                       axis=1).real
