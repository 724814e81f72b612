"""diracsim: Dirac waves in weak space-time random electromagnetic fields.

A numpy/scipy laboratory for the semiclassical Dirac equation driven by a
Markov-in-time random potential, its matrix-valued Wigner transform, and the
limiting radiative transport system for the electron/positron phase-space
densities.
"""

__version__ = "0.1.0"

from .algebra import (GAMMA, EigenSystem, GammaSet, PhysicalConstants,
                      ScatteringWeights, build_gamma_set, cancellation_constant,
                      dispersion_matrix, eigenbasis, eigensystem, lambda_plus,
                      projectors, scattering_weights, scattering_weights_trace)
from .grid import Grid, quasi_1d
from .randomfield import (FieldPath, FieldSample, ModeLattice, SpectrumDescriptor,
                          estimate_correlation, evolve_jump_path, mode_lattice,
                          sample_invariant_measure, synthesize_field)
from .transport import (CollisionKernelCache, ElasticKernelCache, MomentumBall,
                        TransportState, build_elastic_kernel, build_kernels,
                        collision_rhs, elastic_rhs, energy_shells,
                        free_streaming_rhs, integrate, momentum_ball)
from .wave import (SolverConfig, SpinorField, Trajectory, make_wavepacket,
                   random_band_limited, run, step)
from .wigner import (ModeDecomposition, WignerData, mode_decompose, weak_pairing,
                     verify_pseudodiff_identities, wigner_transform,
                     wigner_transform_pair)

__all__ = [
    "GAMMA", "EigenSystem", "GammaSet", "PhysicalConstants", "ScatteringWeights",
    "build_gamma_set", "cancellation_constant", "dispersion_matrix", "eigenbasis",
    "eigensystem", "lambda_plus", "projectors", "scattering_weights",
    "scattering_weights_trace",
    "Grid", "quasi_1d",
    "FieldPath", "FieldSample", "ModeLattice", "SpectrumDescriptor",
    "estimate_correlation", "evolve_jump_path", "mode_lattice",
    "sample_invariant_measure", "synthesize_field",
    "CollisionKernelCache", "ElasticKernelCache", "MomentumBall", "TransportState",
    "build_elastic_kernel", "build_kernels", "collision_rhs", "elastic_rhs",
    "energy_shells", "free_streaming_rhs", "integrate", "momentum_ball",
    "SolverConfig", "SpinorField", "Trajectory", "make_wavepacket",
    "random_band_limited", "run", "step",
    "ModeDecomposition", "WignerData", "mode_decompose", "weak_pairing",
    "verify_pseudodiff_identities", "wigner_transform", "wigner_transform_pair",
]
