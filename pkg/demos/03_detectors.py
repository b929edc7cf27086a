"""Detector models for the crossing question.

An imaginary potential in x < 0 models an irreversible detector; summing a
continuous position measurement over positive readings gives a second,
closely related model. Scans both and then prints one comparison record.

    python3 demos/03_detectors.py
"""
import math

import numpy as np

from crossing_times import (DetectorParams, GaussianPacketSpec, Grid1D, MeasurementParams,
                            PhysParams, compare_methods, continuous_measurement_probability,
                            detection_probabilities, effective_potential, make_gaussian)

grid = Grid1D.symmetric(40.0, 2048)
psi = make_gaussian(GaussianPacketSpec(5.0, -5.0, 0.5), grid)

# %% Detection probability against the detector rate: too strong a detector
# reflects the packet and detects less.
print("packet x0 = 5, p0 = -5, sigma = 0.5, tau = 2")
print("  gamma_d     p_d")
for gd in (0.1, 1.0, 10.0, 100.0, 1000.0):
    print(f"  {gd:7.1f}  {detection_probabilities(psi, DetectorParams(gd, 1e-3), 2.0).p_d:.4f}")

# %% Effective potential of the measurement model.
a, dt = 1.0, 0.01
x = np.array([-10.0, -5.0, -1.0, 0.0, 1.0, 5.0, 20.0]) / math.sqrt(2 * a * dt)
print(f"\neffective potential, a = {a}, dt = {dt}  (ln2/dt = {math.log(2) / dt:.2f})")
for xi, v in zip(x, effective_potential(x, a, dt)):
    quad = 2 * a * xi * xi
    print(f"  x = {xi:8.2f}  V = {v:12.4f}  2 a x^2 = {quad:12.4f}")

# %% Measurement strength scan. Each slice is a separate reading, so for
# a dt << 1 a reading is positive only about half the time anywhere near
# the packet and p_plus collapses; the two-sided limits need a dt of order 1.
print("\np_plus against measurement strength (dt = 1e-3)")
for a in (1e2, 1e3, 1e4, 1e6):
    print(f"  a = {a:8.0e}  p_plus = {continuous_measurement_probability(psi, MeasurementParams(a, 1e-3), 2.0):.4f}")

# %% One record with every candidate for the same packet. Here a = D = 0.1,
# deep in the weak regime above, so the measurement column reads zero.
small = make_gaussian(GaussianPacketSpec(5.0, -5.0, 0.5), Grid1D.symmetric(20.0, 512))
rec = compare_methods(small, PhysParams.from_diffusion(0.1, gamma_d=10.0), 2.0)
strong = compare_methods(small, PhysParams.from_diffusion(0.1, gamma_d=10.0), 2.0, a=1e3)
print("\ncomparison, tau = 2, D = 0.1, gamma_d = 10, a = D")
print(f"  image method p_nocross  {rec.p_nocross_image:.4f}  (Re D {rec.re_D:.4f})")
print(f"  environment p_r         {rec.p_nocross_qbm:.4f}")
print(f"  detector p_nd           {rec.p_nd:.4f}")
print(f"  measurement p_plus      {rec.p_plus:.4f}")
print(f"  measurement p_plus at a = 1e3: {strong.p_plus:.4f}")
