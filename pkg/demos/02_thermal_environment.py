"""Crossing with a thermal environment.

The environment turns the crossing question into a classical first-passage
problem for the Wigner function evolved by the absorbing Fokker-Planck
kernel. Shows the closed-form kernel against Langevin Monte Carlo, then the
quantum packet with and without the environment.

    python3 demos/02_thermal_environment.py
"""
import time

import numpy as np

from crossing_times import (FPKernelParams, GaussianPacketSpec, Grid1D, crossing_decoherence,
                            langevin_survival_curve, make_gaussian, qbm_no_cross_probability,
                            survival_from_point, wigner_transform)
from crossing_times.fokker_planck import point_sampler

# %% Survival of a single phase-space start, closed-form kernel vs Monte Carlo.
# The two agree for starts moving away from the boundary; for starts heading
# towards it the closed-form kernel loses too much probability.
taus = [0.5, 1.0, 2.0]
print("survival from (p0, x0 = 0.5), m = D = 1")
print("  p0   tau    kernel     Langevin (2e5 paths, dt 1e-3)")
for p0 in (-1.0, 1.0):
    s, se = langevin_survival_curve(point_sampler(p0, 0.5), 1.0, 1.0, taus,
                                    n_paths=200_000, dt=1e-3, seed=1)
    for tau, s_mc, e in zip(taus, s, se):
        q = survival_from_point(np.array([p0]), np.array([0.5]), FPKernelParams(1, 1, tau))[0]
        print(f"  {p0:+.0f}  {tau:4.1f}   {q:.4f}     {s_mc:.4f} +- {e:.4f}")

# %% Wigner function of a quantum packet far from the boundary.
grid = Grid1D.symmetric(20.0, 512)
crossing = make_gaussian(GaussianPacketSpec(5.0, -5.0, 0.5), grid)
away = make_gaussian(GaussianPacketSpec(5.0, 2.0, 0.5), grid)
W = wigner_transform(crossing)
print(f"\nWigner function: total {W.total():.12f}, min {W.values.min():.2e}")

# %% With the environment the crossing packet almost surely crosses; the
# point-particle answer says it almost surely does not.
par = FPKernelParams(1.0, 0.1, 3.0)
t = time.perf_counter()
q_cross = qbm_no_cross_probability(crossing, par)
q_away = qbm_no_cross_probability(away, par)
img = crossing_decoherence(crossing, par.tau)
print(f"\nnever-crossing probability over tau = {par.tau} (D = {par.D})")
print(f"  crossing packet, environment:     {q_cross.p_nocross:.5f}")
print(f"  moving-away packet, environment:  {q_away.p_nocross:.5f}")
print(f"  crossing packet, point particle:  {img.p_nocross:.5f}  (p_cross {img.p_cross:.3f})")
print(f"  ({time.perf_counter() - t:.1f} s)")
