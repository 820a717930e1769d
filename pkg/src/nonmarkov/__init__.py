"""Reduced qubit dynamics in bosonic reservoirs and non-Markovianity measures."""

from .amplitude import (
    AmplitudeTrajectory,
    Method,
    SolverConfig,
    amplitude_envelope,
    compute_trajectory,
    default_horizon,
    lorentzian_closed_form,
    lorentzian_min_times,
    solve_volterra,
    write_trajectory_csv,
)
from .dynamics import (
    QubitInitialState,
    ScalarTrajectory,
    StatePair,
    bell_phi,
    bell_psi,
    concurrence_bell,
    concurrence_trajectories,
    density_matrix,
    evolve_single,
    evolve_two_qubit,
    excited_state,
    ground_state,
    kraus_pair,
    minus_state,
    optimal_distance_trajectory,
    optimal_pair,
    pair_distance_trajectory,
    plus_state,
    population_excited,
    trace_distance_single,
    trace_distance_two,
    two_qubit_distance_trajectory,
)
from .errors import (
    HorizonError,
    NoZerosError,
    NumericalFailureError,
    PhysicalityError,
    UnsupportedModelError,
)
from .linalg import DensityMatrix, hermitian_eigenvalues, kron, trace_distance, wootters_concurrence
from .measure import (
    BruteForceResult,
    ExtremumInterval,
    NonMarkovianityReport,
    TheoremVerification,
    blp_from_trajectory,
    brute_force_max,
    find_extrema,
    lower_bound_two,
    lower_bound_two_from_population,
    nonmarkovianity_from_population,
    nonmarkovianity_single,
    sample_state_pairs,
    verify_theorem,
)
from .reservoir import (
    CorrelationSamples,
    Lorentzian,
    OhmicFamily,
    Regime,
    SpectralModel,
    Tabulated,
    classify_regime,
    correlation,
    kappa,
    load_tabulated,
    spectral_density,
)

__version__ = "0.1.0"
