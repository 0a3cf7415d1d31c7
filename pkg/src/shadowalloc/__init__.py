"""Pauli measurement allocation with provable energy-estimation guarantees."""

from .exceptions import (
    BoundUndefinedError,
    ConfigurationError,
    ContractViolation,
    DomainError,
    EmptyHamiltonianError,
    FormatError,
    NonConvergenceError,
    ResourceCapError,
    StructuralError,
    UnsupportedEstimationError,
)
from .pauli import PauliString, commutes, format_pauli, merge_idle, parse_pauli, qwc, support
from .hamiltonian import WeightedHamiltonian, norms, parse_hamiltonian, read_hamiltonian
from .guarantees import (
    AllocationCounts,
    GuaranteeReport,
    alpha_delta,
    count_compatible,
    default_alpha,
    derandomization_weights,
    epsilon_guarantee,
    failure_probability_bound,
    shadowgrouping_weights,
    single_shot_budget,
    truncation_mask,
    truncation_threshold,
    worst_case_budget,
)
from .schemes import (
    BruteForce,
    RandomPauli,
    SchemeConfig,
    SchemeState,
    ShadowGrouping,
    brute_force_next,
    format_settings,
    parse_settings,
    generate_settings,
    guarantee_curve,
    random_pauli_next,
    shadow_grouping_next,
    truncated_pipeline,
)
from .simulator import MeasurementRecord, QuantumState, expectation, ground_state, sample_outcome
from .estimation import (
    EstimateReport,
    GroupedMeanEstimator,
    grouped_mean_estimate,
    rmse,
    run_benchmark,
    single_shot_estimate,
)

__version__ = "0.1.0"
