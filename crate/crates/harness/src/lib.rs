//! Experiment harness: training, evaluation, offline replay and benchmark
//! runs for role-assignment learners in the soccer simulator.

pub mod bench;
pub mod config;
pub mod error;
pub mod metrics;
pub mod stats;
pub mod team;
pub mod training;

pub use bench::{run_benchmarks, Suite};
pub use config::ExperimentConfig;
pub use error::{HarnessError, HarnessResult};
pub use metrics::{BinMetrics, RunMetrics};
pub use team::{AgentLearner, Team};
pub use training::{evaluate, play_game, replay_offline, run_training};
