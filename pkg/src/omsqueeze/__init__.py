"""Optical-microwave two-mode squeezing via a parametrically amplified mechanical mode.

Markovian (Lyapunov) and structured-reservoir (non-Markovian Heisenberg-Langevin)
covariance dynamics of the effective two-mode squeezing model.
"""

from .analysis import (
    Scenario,
    optimal_angle,
    optimal_variances,
    squeezing_level,
    squeezing_table,
    sweep_generation,
    sweep_persistence,
    variance_xy,
)
from .covariance import CovarianceTrajectory, is_physical, symplectic_eigenvalues
from .drive import DriveSchedule
from .markov import MarkovModel, analytic_variance, full_model, full_propagate, propagate_cm
from .model import (
    SystemParams,
    effective_coupling,
    effective_model,
    eigen_splitting,
    energy_shift,
    transition_matrix,
    validity_check,
)
from .nonmarkov import (
    GreensFunction,
    NoiseCovariance,
    assemble_cm,
    embedding_run,
    nmhl_run,
    noise_covariance,
    solve_greens,
)
from .spectra import LorentzianBath, markovian_rate, memory_kernel, spectral_density
from .stepper import SolverError, uniform_grid

__version__ = "0.1.0"

__all__ = [
    "CovarianceTrajectory",
    "DriveSchedule",
    "GreensFunction",
    "LorentzianBath",
    "MarkovModel",
    "NoiseCovariance",
    "Scenario",
    "SolverError",
    "SystemParams",
    "analytic_variance",
    "assemble_cm",
    "effective_coupling",
    "effective_model",
    "eigen_splitting",
    "embedding_run",
    "energy_shift",
    "full_model",
    "full_propagate",
    "is_physical",
    "markovian_rate",
    "memory_kernel",
    "nmhl_run",
    "noise_covariance",
    "optimal_angle",
    "optimal_variances",
    "propagate_cm",
    "solve_greens",
    "spectral_density",
    "squeezing_level",
    "squeezing_table",
    "sweep_generation",
    "sweep_persistence",
    "symplectic_eigenvalues",
    "transition_matrix",
    "uniform_grid",
    "validity_check",
    "variance_xy",
]
