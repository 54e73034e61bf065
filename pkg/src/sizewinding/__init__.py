"""Size and winding-size distributions for the large-q SYK model.

Scramblon-theory closed forms (large-N and finite-N-corrected) for the
operator-size distribution P and the winding distribution Q, an
exact-diagonalization oracle for small Majorana systems, and the two-sided
teleportation correlator derived from Q.
"""

from .dist import (ContinuousDistribution, WindingFit,
                   asymptotic_validity_ratio, early_winding_slope,
                   finite_n_distribution, finite_n_point, fit_winding,
                   large_n_distribution, large_n_norm, large_n_point,
                   size_support, strength_from_size, winding_phase_asymptotic,
                   winding_ratio, winding_slope_at)
from .ed import (CouplingTensor, EnsembleResult, SizeDistribution, SykParams,
                 build_hamiltonian, build_majorana_ops, dressed_operator,
                 parity_operator, run_ensemble, sample_couplings,
                 size_decompose)
from .errors import NumericalError
from .genfunc import (GeneratingFunctionSample, generating_function,
                      moments_from_distribution, size_moments)
from .largeq import (ContourKind, LargeQParams, ScramblonPropagator,
                     dressed_two_point, otoc, solve_velocity,
                     strength_density, vertex_moment)
from .teleport import (DoubledSystem, TeleportResult, coupling_expectation,
                       scan_coupling, teleport_exact, teleport_from_q,
                       thermal_size_distribution)

__version__ = "0.1.0"

__all__ = [
    "ContinuousDistribution", "ContourKind", "CouplingTensor",
    "DoubledSystem", "EnsembleResult", "GeneratingFunctionSample",
    "LargeQParams", "NumericalError", "ScramblonPropagator",
    "SizeDistribution", "SykParams", "TeleportResult", "WindingFit",
    "asymptotic_validity_ratio", "build_hamiltonian", "build_majorana_ops",
    "coupling_expectation", "dressed_operator", "dressed_two_point",
    "early_winding_slope", "finite_n_distribution", "finite_n_point",
    "fit_winding", "generating_function", "large_n_distribution",
    "large_n_norm", "large_n_point", "moments_from_distribution", "otoc",
    "parity_operator", "run_ensemble", "sample_couplings", "scan_coupling",
    "size_decompose", "size_moments", "size_support", "solve_velocity",
    "strength_density", "strength_from_size", "teleport_exact",
    "teleport_from_q", "thermal_size_distribution", "vertex_moment",
    "winding_phase_asymptotic", "winding_ratio", "winding_slope_at",
]
