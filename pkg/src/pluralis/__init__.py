"""Tabular multi-objective RL with welfare-based policy selection and
run-time steering from stakeholder feedback."""

from .coverage import (
    CoverageEntry,
    CoverageSet,
    convex_coverage_set,
    coverage_from_json,
    coverage_to_json,
    load_coverage,
    pareto_dominates,
    pareto_front,
    pareto_set_bruteforce,
    save_coverage,
    solve_scalarized,
    solver_calls,
)
from .envs import load_momdp, load_momdp_file
from .errors import (
    ConfigError,
    DomainError,
    FingerprintMismatchError,
    GuardError,
    PluralisError,
)
from .momdp import (
    Momdp,
    Policy,
    Trajectory,
    TrajectoryStep,
    discounted_return,
    enumerate_policies,
    make_momdp,
    num_policies,
    policy_from_action_map,
    policy_from_id,
    policy_rank,
    policy_value,
    random_momdp,
    rollout,
)
from .steering import (
    FeedbackEvent,
    Jury,
    PreferenceModel,
    SessionLog,
    Stakeholder,
    SteeringSession,
    init_preference_model,
    jury_from_json,
    jury_to_json,
    jury_to_objectives,
    jury_welfare,
    posterior_mean,
    posterior_summary,
    records_to_csv,
    replay_session,
    reselect_policy,
    steering_session,
    update_preference_model,
)
from .weights import simplex_grid, simplex_grid_size, validate_weight_vector
from .welfare import (
    Ggf,
    Gggf,
    Linear,
    Nsw,
    PluralisticGgf,
    SelectionResult,
    UtilitySpec,
    evaluate,
    generalized_ggf,
    ggf,
    linear_utility,
    nsw,
    pluralistic_ggf,
    pluralistic_nsw,
    select_policy,
    utility_from_json,
    utility_to_json,
)

__version__ = "0.1.0"
