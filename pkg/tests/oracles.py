"""Independent reference computations used only by the test-suite.

Nothing here calls into the FFT propagators or the packaged kernels, so the
checks built on these helpers do not share a code path with what they check.
"""
from __future__ import annotations

import numpy as np
from scipy.special import wofz


def _half_line_gaussian_integral(A, B, C):
    """``int_0^inf exp(-A u^2 + B u + C) du`` for complex A with Re A > 0."""
    sA = np.sqrt(A)
    z = -B / (2 * sA)
    pref = 0.5 * np.sqrt(np.pi) / sA
    with np.errstate(over="ignore", invalid="ignore"):
        pos = np.exp(C) * wofz(1j * z)
        neg = 2 * np.exp(C + z * z) - np.exp(C) * wofz(-1j * z)
    return pref * np.where(z.real >= 0, pos, neg)


def _kernel_against_packet(x, s, side, tau, x0, p0, sigma, m=1.0, hbar=1.0):
    """``int_{side} g(x - s u, tau) phi(u) du`` for the free kernel g and the
    normalised Gaussian packet ``phi``; ``side`` is +1 for u > 0, -1 for u < 0."""
    x = np.asarray(x, dtype=float)
    A = 1 / (4 * sigma ** 2) - 1j * m / (2 * hbar * tau) + 0 * x
    B = -1j * m * s * x / (hbar * tau) + x0 / (2 * sigma ** 2) + 1j * p0 / hbar
    C = 1j * m * x ** 2 / (2 * hbar * tau) - x0 ** 2 / (4 * sigma ** 2)
    if side < 0:
        B = -B
    kern = np.sqrt(m / (2 * np.pi * hbar * tau)) * np.exp(-1j * np.pi / 4)
    norm = (2 * np.pi * sigma ** 2) ** -0.25
    return kern * norm * _half_line_gaussian_integral(A, B, C)


def gaussian_restricted_amplitude(x, tau, x0, p0, sigma, m=1.0, hbar=1.0):
    """Continuum never-crossing amplitude for a Gaussian packet, from the
    image kernel ``g(x - u) - g(x + u)`` integrated in closed form."""
    x = np.asarray(x, dtype=float)
    args = (tau, x0, p0, sigma, m, hbar)
    right = (_kernel_against_packet(x, 1, 1, *args)
             - _kernel_against_packet(x, -1, 1, *args))
    left = (_kernel_against_packet(x, 1, -1, *args)
            - _kernel_against_packet(x, -1, -1, *args))
    return np.where(x >= 0, right, left)


def gaussian_free_amplitude(x, tau, x0, p0, sigma, m=1.0, hbar=1.0):
    """Freely evolved Gaussian packet, as the sum of both half-line integrals."""
    args = (tau, x0, p0, sigma, m, hbar)
    return (_kernel_against_packet(x, 1, 1, *args)
            + _kernel_against_packet(x, 1, -1, *args))
