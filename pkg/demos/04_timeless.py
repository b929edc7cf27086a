"""Entering a region without a clock.

Each sample of initial data labels a whole straight-line trajectory; the
question is only whether that trajectory spends any time in a disk.

    python3 demos/04_timeless.py
"""
import math

import numpy as np

from crossing_times import Disk, TimelessConfig, sojourn_time, timeless_region_probability
from crossing_times.timeless import epsilon_sweep, fiducial_shift_check, gaussian_phase_space_sampler

disk = Disk((0.0, 0.0), 1.0)

# %% Sojourn times of a few trajectories.
for x, p in [((-5, 0), (2, 0)), ((-5, 0.5), (2, 0)), ((-5, 1.0), (2, 0)), ((0.2, 0.1), (0, 0))]:
    print(f"x0 = {x}, p0 = {p}: sojourn {sojourn_time(np.array(x, float), np.array(p, float), disk)}")

# %% Gaussian initial data centred on the disk.
cfg = TimelessConfig(gaussian_phase_space_sampler(1.0, 1.0), n_samples=500_000, seed=3)
est = timeless_region_probability(cfg, disk)
print(f"\nP(enter) = {est.probability:.5f} +- {est.stderr:.5f}; "
      f"impact-parameter formula erf(1/sqrt 2) = {math.erf(1 / math.sqrt(2)):.5f}")

# %% Shifting the fiducial time changes nothing.
for shift in (7.3, -100.0):
    print(f"shift {shift:+.1f}: |dP| = {fiducial_shift_check(cfg, disk, shift=shift)}")

# %% Sensitivity to the sojourn threshold.
eps = [1e-8, 1e-6, 1e-3, 0.1, 0.5, 1.0]
for e, r in zip(eps, epsilon_sweep(cfg, disk, eps)):
    print(f"epsilon {e:7.0e}: {r.probability:.5f}")
