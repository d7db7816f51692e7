"""Dissipative dynamics and noise-induced currents in a two-well bosonic trap.

The library builds the truncated two-well Bose-Hubbard model, assembles
GKSL generators in the weak- and singular-coupling Markovian limits,
propagates states exactly, evaluates the closed-form current slopes, and
unravels the singular dynamics as an average over white-noise unitary
trajectories.  The ``wellflow`` command drives batch runs from a JSON
config.
"""

__version__ = "0.1.0"

from .analytics import (SlopeReport, compare, slope_singular, slope_weak_exact,
                        slope_weak_largeN, slope_weak_lorentzian)
from .environment import (DELTA, EXPONENTIAL, CorrelationModel, SpectralMatrix,
                          equal_coupling_model, fourier_c, hilbert_s,
                          spectral_matrix)
from .evolution import (IntegrationError, Trajectory, current_slope, evolve,
                        expectation)
from .fockspace import (FockBasis, annihilator, creator, fock_state,
                        hermitian_part, identity, number_operator,
                        number_projector, validate_density_matrix)
from .generator import (KossakowskiBlock, LindbladGenerator, apply_dual,
                        apply_schrodinger, asymmetric_weak_coupling_generator,
                        hermitian_couplings, singular_coupling_generator,
                        superoperator_matrix, superoperator_sparse,
                        unvectorize, vectorize, weak_coupling_generator)
from .model import (AsymmetricTrapError, BohrFrequency, ModelParams,
                    barycenter_operator, bohr_frequencies,
                    bose_hubbard_hamiltonian, closed_current_derivative,
                    current_operator, single_well_frequency)
from .stochastic import (NOISE_KOSSAKOWSKI_FACTOR, CalibrationError,
                         EnsembleResult, NoiseConfig, StepSizeError,
                         calibrate_noise, run_ensemble)

__all__ = [
    "AsymmetricTrapError", "BohrFrequency", "CalibrationError",
    "CorrelationModel", "DELTA", "EXPONENTIAL", "EnsembleResult", "FockBasis",
    "IntegrationError", "KossakowskiBlock", "LindbladGenerator", "ModelParams",
    "NOISE_KOSSAKOWSKI_FACTOR", "NoiseConfig", "SlopeReport", "SpectralMatrix",
    "StepSizeError", "Trajectory", "annihilator", "apply_dual",
    "apply_schrodinger", "asymmetric_weak_coupling_generator",
    "barycenter_operator", "bohr_frequencies", "bose_hubbard_hamiltonian",
    "calibrate_noise", "closed_current_derivative", "compare", "creator",
    "current_operator", "current_slope", "equal_coupling_model", "evolve",
    "expectation", "fock_state", "fourier_c", "hermitian_couplings",
    "hermitian_part", "hilbert_s", "identity", "number_operator",
    "number_projector", "run_ensemble", "single_well_frequency",
    "singular_coupling_generator", "slope_singular", "slope_weak_exact",
    "slope_weak_largeN", "slope_weak_lorentzian", "spectral_matrix",
    "superoperator_matrix", "superoperator_sparse", "unvectorize",
    "validate_density_matrix", "vectorize", "weak_coupling_generator",
]
