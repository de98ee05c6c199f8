"""Anytime-valid sequential monitors for equilibrium deviations in games.

Betting e-processes watch repeated normal-form play for profitable
deviations with family-wise or false-discovery-rate control; likelihood
ratio monitors check compliance with known policies in stochastic games.
The harness subpackage reproduces the quantitative experiments end to end.
"""

from .eprocess import (
    BettingMixture,
    EProcessState,
    detection_bound_uniform,
    eprocess_update,
    evalue,
    exact_uniform_mixture,
    increment,
    mixture_value,
    optimal_lambda,
    slack_lower_bound,
)
from .games import (
    ActionProfile,
    EquilibriumMode,
    JointStrategy,
    NormalFormGame,
    ScenarioLabel,
    ScenarioSpec,
    StrategyKind,
    deviation_gain,
    equilibrium_slack,
    expected_payoff,
    sample_profile,
    two_player_game,
)
from .monitors import (
    EquilibriumMonitor,
    HypothesisId,
    MonitorConfig,
    RejectionState,
    StepDecision,
    ebh_rejection,
    enumerate_hypotheses,
    fdr_step,
    fwer_step,
)
from .stochastic import (
    LRMonitorState,
    MatrixGameSolution,
    Policy,
    ShapleySolution,
    SolverConfig,
    StochasticGameModel,
    chi_square_div,
    empirical_state_distribution,
    exploitability,
    kl_quadratic_check,
    lr_detection_bound,
    lr_evalue,
    lr_step,
    matrix_game_solve,
    mixture_policy,
    overshoot_constant,
    shapley_solve,
    smooth_policy,
    state_avg_kl,
    stationary_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "ActionProfile",
    "BettingMixture",
    "EProcessState",
    "EquilibriumMode",
    "EquilibriumMonitor",
    "HypothesisId",
    "JointStrategy",
    "LRMonitorState",
    "MatrixGameSolution",
    "MonitorConfig",
    "NormalFormGame",
    "Policy",
    "RejectionState",
    "ScenarioLabel",
    "ScenarioSpec",
    "ShapleySolution",
    "SolverConfig",
    "StepDecision",
    "StochasticGameModel",
    "StrategyKind",
    "chi_square_div",
    "detection_bound_uniform",
    "deviation_gain",
    "ebh_rejection",
    "empirical_state_distribution",
    "enumerate_hypotheses",
    "eprocess_update",
    "equilibrium_slack",
    "evalue",
    "exact_uniform_mixture",
    "expected_payoff",
    "exploitability",
    "fdr_step",
    "fwer_step",
    "increment",
    "kl_quadratic_check",
    "lr_detection_bound",
    "lr_evalue",
    "lr_step",
    "matrix_game_solve",
    "mixture_policy",
    "mixture_value",
    "optimal_lambda",
    "overshoot_constant",
    "sample_profile",
    "shapley_solve",
    "slack_lower_bound",
    "smooth_policy",
    "state_avg_kl",
    "stationary_distribution",
    "two_player_game",
]
