"""Quantum Fokker-Planck simulator and verification suite (truncated Fock basis)."""

from .errors import (ConfigError, DimensionError, GridError, GuardError,
                     ParameterError, PotentialError, QfpError,
                     SteadyStateError, StiffnessError, TruncationError)
from .fock import (PotentialSpec, build_canonical, build_ladder,
                   build_potential, build_potential_derivative,
                   position_function_matrix)
from .gksl import (Classification, QfpParams, Superoperator, apply_dual,
                   apply_generator, build_hamiltonian, build_lindblad_ops,
                   build_semigroup_generator, build_superoperator, unvec,
                   validate_params, vec)
from .states import (DensityMatrix, coherent_state, fock_state,
                     normalize_density, pure_state_fidelity, random_state,
                     thermal_state, trace_distance)
from .dynamics import Trajectory, evolve
from .steady import (GaussianSteady, PurityClass, PurityClassification,
                     SteadyReport, gaussian_reference, gaussian_steady_params,
                     pure_gaussian_state, purity_conditions,
                     purity_identity_check, solve_steady)
from .wigner import (CharacteristicSample, MomentReport, PhaseSpaceGrid,
                     WfpResidual, WignerGrid, characteristic_function,
                     density_kernel, dictionary_moments, wfp_residual,
                     wigner_from_characteristic, wigner_transform)
from .lyapunov import (LyapunovCertificate, ViolationReport, build_X, build_Y,
                       check_drift, check_markov_bound, check_positivity_lemma,
                       choose_certificate, interior_expansion_residual)

__version__ = "0.1.0"

__all__ = [
    "QfpError", "DimensionError", "PotentialError", "ParameterError",
    "TruncationError", "StiffnessError", "GridError", "GuardError",
    "SteadyStateError", "ConfigError",
    "PotentialSpec", "build_ladder", "build_canonical", "build_potential",
    "build_potential_derivative", "position_function_matrix",
    "QfpParams", "Classification", "Superoperator", "validate_params",
    "build_hamiltonian", "build_lindblad_ops", "build_semigroup_generator",
    "apply_generator", "apply_dual", "build_superoperator", "vec", "unvec",
    "DensityMatrix", "fock_state", "coherent_state", "thermal_state",
    "random_state", "normalize_density", "trace_distance", "pure_state_fidelity",
    "Trajectory", "evolve",
    "SteadyReport", "GaussianSteady", "PurityClass", "PurityClassification",
    "solve_steady", "gaussian_reference", "gaussian_steady_params",
    "pure_gaussian_state", "purity_conditions", "purity_identity_check",
    "PhaseSpaceGrid", "WignerGrid", "CharacteristicSample", "MomentReport",
    "WfpResidual", "density_kernel", "wigner_transform",
    "characteristic_function", "wigner_from_characteristic",
    "dictionary_moments", "wfp_residual",
    "LyapunovCertificate", "ViolationReport", "choose_certificate", "build_X",
    "build_Y", "check_positivity_lemma", "check_drift", "check_markov_bound",
    "interior_expansion_residual",
]
