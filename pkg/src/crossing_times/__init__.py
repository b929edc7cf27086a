"""Crossing and arrival probabilities for a free quantum particle and x = 0.

Candidates implemented side by side: decoherent-histories crossing
probabilities from restricted propagators, their thermal (Wigner plus
absorbing Fokker-Planck) counterpart, an irreversible detector with an
imaginary potential, a continuous position measurement, and the classical
timeless region probability.
"""
__version__ = "0.1.0"

from .core import (ConfigurationError, GaussianPacketSpec, Grid1D, PhaseSpaceDistribution,
                   PhysParams, WaveFunction, make_gaussian, norm_squared, odd_superposition)
from .propagation import (PropagationMode, crossing_propagate, free_propagate, propagate,
                          restricted_propagate)
from .decoherence import (CrossingResult, DegenerateFitError, approximate_decoherence_check,
                          crossing_decoherence, small_time_scaling)
from .fokker_planck import (FPKernelParams, carslaw_green, classical_cross_probability,
                            classical_no_cross_probability, fp_propagator,
                            langevin_first_passage, langevin_survival_curve,
                            restricted_fp_propagator, survival_from_point)
from .wigner import WignerFunction, qbm_no_cross_probability, wigner_transform
from .detector import (DetectorParams, MeasurementParams, compare_methods,
                       continuous_measurement_probability, detection_probabilities,
                       detector_evolve, effective_potential)
from .timeless import (Disk, Rectangle, TimelessConfig, fiducial_shift_check, sojourn_time,
                       timeless_region_probability)

__all__ = [n for n in dir() if not n.startswith("_")]
