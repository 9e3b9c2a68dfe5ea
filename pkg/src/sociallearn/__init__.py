"""Seedable simulation and closed-form analysis of social learning over
agent networks with self-interested agents and adaptive trust weights."""

from .asymptotics import (
    Decomposition,
    check_consistency,
    decompose,
    divergence_matrix,
    equivalent_sets,
    kl_divergence,
    limiting_matrix,
    limiting_matrix_exact,
    observationally_equivalent_set,
    pairwise_rejection_rates,
    rejection_rates,
    subnetwork_confidence,
)
from .backend import available_backends, get_backend
from .dynamics import Trajectory, bayes_update, fuse_log_linear, global_belief, simulate
from .harness import (
    MonteCarloResult,
    RunResult,
    ScenarioError,
    analyze_scenario,
    empirical_rate_fit,
    generate_scenario,
    monte_carlo,
    run_scenario,
    steady_state_reference,
    time_to_threshold,
    tracking_gap,
    write_trajectory_csv,
)
from .model import (
    HypothesisSet,
    LikelihoodModel,
    NetworkGraph,
    NumericFault,
    ScenarioConfig,
    draw_observations,
    load_scenario,
    sample_observation,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_combination_matrix,
    validate_scenario,
)
from .weights import (
    adaptive_matrix,
    same_state_probability,
    state_specific_weight,
    uniform_weights,
    weight_column,
)

__version__ = "0.1.0"
