//! Incremental off-policy learners: Greedy-GQ(λ) and Off-PAC.

mod checkpoint;
mod greedy_gq;
mod offpac;

pub use checkpoint::{Algorithm, Checkpoint};
pub use greedy_gq::{GreedyGq, GreedyGqParams};
pub use offpac::{gibbs_log_gradient, GibbsActor, GtdCritic, OffPac, OffPacParams};

use serde::{Deserialize, Serialize};

use crate::error::{GvfError, Result};

/// Per-update values returned for logging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateDiagnostics {
    pub delta: f64,
    pub rho: f64,
    /// Entries in the main (Greedy-GQ) or critic trace after the update.
    pub trace_len: usize,
    /// Entries in the actor trace; zero for Greedy-GQ.
    pub actor_trace_len: usize,
}

pub(crate) fn check_delta(delta: f64, samples: u64) -> Result<f64> {
    if delta.is_finite() {
        Ok(delta)
    } else {
        Err(GvfError::Poisoned {
            samples,
            reason: format!("TD error became {delta}"),
        })
    }
}

/// Maps a weight-update failure to a poisoned-learner error.
pub(crate) fn poisoned(samples: u64) -> impl FnOnce(GvfError) -> GvfError {
    move |e| match e {
        GvfError::Contract(reason) => GvfError::Poisoned { samples, reason },
        other => other,
    }
}

pub(crate) fn check_rate(name: &str, rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(GvfError::Contract(format!("{name} must be positive and finite, got {rate}")))
    }
}
