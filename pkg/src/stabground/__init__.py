"""Stabilizer ground states and measurement-based imaginary time evolution."""

import logging

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

from .errors import (
    CapacityError,
    DimensionError,
    DomainError,
    ParseError,
    SearchFailure,
    StabgroundError,
    ValidationError,
)
from .hamiltonian import Hamiltonian, load_hamiltonian, parse_hamiltonian, tfim
from .pauli import PauliString, commutes, format_pauli, multiply, parse_pauli
from .stabsearch import (
    GeneratorSet,
    enumerate_generator_sets,
    filter_xi,
    find_min_groups,
    group_energy,
    group_energy_oracle,
    refine_optimal,
)
from .gaopt import GaConfig, commutation_matrix, complete_generators, degeneracy_count, ga_search
from .tableau import CliffordCircuit, Tableau, apply_circuit, synthesize_circuit, verify_stabilized
from .mite import MiteConfig, eigensolve, run_ensemble, run_trajectory, weak_measure
from .analysis import SpectralParams, convergence_error, k_min, k_prime, t_fail, t_total

__all__ = [
    "CapacityError", "DimensionError", "DomainError", "ParseError", "SearchFailure",
    "StabgroundError", "ValidationError",
    "Hamiltonian", "load_hamiltonian", "parse_hamiltonian", "tfim",
    "PauliString", "commutes", "format_pauli", "multiply", "parse_pauli",
    "GeneratorSet", "enumerate_generator_sets", "filter_xi", "find_min_groups",
    "group_energy", "group_energy_oracle", "refine_optimal",
    "GaConfig", "commutation_matrix", "complete_generators", "degeneracy_count", "ga_search",
    "CliffordCircuit", "Tableau", "apply_circuit", "synthesize_circuit", "verify_stabilized",
    "MiteConfig", "eigensolve", "run_ensemble", "run_trajectory", "weak_measure",
    "SpectralParams", "convergence_error", "k_min", "k_prime", "t_fail", "t_total",
]
