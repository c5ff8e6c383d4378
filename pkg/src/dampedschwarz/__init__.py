"""Convergence of parallel Schwarz methods for naturally damped Helmholtz problems."""

__version__ = "0.1.0"

from .geometry import Decomposition, build_decomposition
from .mode_analysis import (
    CAVITY,
    WAVEGUIDE,
    BoundaryConfig,
    assemble_iteration_matrix,
    convergence_factor,
    convergence_factor_profile,
    make_mode,
    max_mode_rho,
)
from .model import DampedCoefficient, PhysicalParams, compute_eta, principal_sqrt
from .spectra import power_iteration_radius, spectral_radius

__all__ = [
    "__version__",
    "PhysicalParams",
    "DampedCoefficient",
    "compute_eta",
    "principal_sqrt",
    "Decomposition",
    "build_decomposition",
    "BoundaryConfig",
    "WAVEGUIDE",
    "CAVITY",
    "make_mode",
    "assemble_iteration_matrix",
    "convergence_factor",
    "convergence_factor_profile",
    "max_mode_rho",
    "spectral_radius",
    "power_iteration_radius",
]
