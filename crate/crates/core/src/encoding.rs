//! Feature-map traits and the small exact encoders used by benchmarks.

use crate::error::{contract, Result};
use crate::sparse::{Features, SparseBinaryVector, SparseVector};

/// φ(s): state features, used by the Off-PAC critic.
pub trait StateEncoder {
    type Output: Features;
    fn dimension(&self) -> usize;
    fn encode(&self, state: &[f64]) -> Result<Self::Output>;
}

/// φ(s, a): state-action features, used by Greedy-GQ and the Gibbs actor.
pub trait StateActionEncoder {
    type Output: Features;
    fn dimension(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn encode(&self, state: &[f64], action: usize) -> Result<Self::Output>;
}

impl<T: StateEncoder + ?Sized> StateEncoder for &T {
    type Output = T::Output;
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn encode(&self, state: &[f64]) -> Result<Self::Output> {
        (**self).encode(state)
    }
}

impl<T: StateActionEncoder + ?Sized> StateActionEncoder for &T {
    type Output = T::Output;
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn num_actions(&self) -> usize {
        (**self).num_actions()
    }
    fn encode(&self, state: &[f64], action: usize) -> Result<Self::Output> {
        (**self).encode(state, action)
    }
}

/// Reads `state[0]` as a discrete state index.
fn state_index(state: &[f64], n_states: usize) -> Result<usize> {
    let raw = *state
        .first()
        .ok_or_else(|| contract("tabular state must hold one index"))?;
    if raw < 0.0 || raw.fract() != 0.0 || raw >= n_states as f64 {
        return Err(contract(format!("invalid tabular state {raw}")));
    }
    Ok(raw as usize)
}

/// One-hot features over a finite state (and optionally action) space.
///
/// States are passed as a single-element slice holding the state index.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularEncoder {
    pub n_states: usize,
    pub n_actions: usize,
}

impl TabularEncoder {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self { n_states, n_actions }
    }
}

impl StateEncoder for TabularEncoder {
    type Output = SparseBinaryVector;

    fn dimension(&self) -> usize {
        self.n_states
    }

    fn encode(&self, state: &[f64]) -> Result<SparseBinaryVector> {
        let s = state_index(state, self.n_states)?;
        SparseBinaryVector::from_indices(self.n_states, vec![s])
    }
}

impl StateActionEncoder for TabularEncoder {
    type Output = SparseBinaryVector;

    fn dimension(&self) -> usize {
        self.n_states * self.n_actions
    }

    fn num_actions(&self) -> usize {
        self.n_actions
    }

    fn encode(&self, state: &[f64], action: usize) -> Result<SparseBinaryVector> {
        let s = state_index(state, self.n_states)?;
        if action >= self.n_actions {
            return Err(contract(format!("unknown action {action}")));
        }
        SparseBinaryVector::from_indices(self.n_states * self.n_actions, vec![s * self.n_actions + action])
    }
}

/// Fixed real-valued feature rows, one per discrete state.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    rows: Vec<SparseVector>,
    dimension: usize,
}

impl FeatureTable {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dimension = rows.first().map(Vec::len).unwrap_or(0);
        if dimension == 0 {
            return Err(contract("feature table needs at least one non-empty row"));
        }
        let rows = rows
            .iter()
            .map(|r| {
                if r.len() != dimension {
                    return Err(contract("feature rows must share one length"));
                }
                SparseVector::from_dense(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows, dimension })
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, s: usize) -> &SparseVector {
        &self.rows[s]
    }
}

impl StateEncoder for FeatureTable {
    type Output = SparseVector;

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn encode(&self, state: &[f64]) -> Result<SparseVector> {
        let s = state_index(state, self.rows.len())?;
        Ok(self.rows[s].clone())
    }
}
