//! Small exact environments used to check the learners against oracles.

mod baird;
mod mdp;
mod mspbe;
mod runs;

pub use baird::{
    baird_environment, FeatureMatrix, PredictionProblem, PredictionStep, BAIRD_FEATURES, BAIRD_GAMMA,
    BAIRD_STATES, DASHED, SOLID,
};
pub use mdp::{
    bellman_residual, gridworld, single_state, two_state_chain, value_iteration, TabularMdp, Transition,
    ValueSolution, GRID_DOWN, GRID_LEFT, GRID_RIGHT, GRID_UP,
};
pub use mspbe::mspbe;
pub use runs::{
    gradient_check, run_baird_gtd, run_baird_td0, run_gridworld_greedy_gq, run_offpac_bandit,
    write_metric_rows, BairdConfig, BairdOutcome, BanditConfig, BanditOutcome, FixedActionFeatures,
    GradientReport, GridworldConfig, GridworldOutcome, MetricRow, METRIC_HEADER,
};
