//! Baird's seven-state star counterexample.

use rand::Rng;

use super::mdp::{TabularMdp, Transition};
use crate::encoding::FeatureTable;
use crate::error::{contract, Result};

pub const BAIRD_STATES: usize = 7;
pub const BAIRD_FEATURES: usize = 8;
pub const BAIRD_GAMMA: f64 = 0.99;
pub const DASHED: usize = 0;
pub const SOLID: usize = 1;

/// Dense per-state features for prediction benchmarks.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if dim == 0 {
            return Err(contract("feature matrix needs at least one non-empty row"));
        }
        for r in &rows {
            if r.len() != dim {
                return Err(contract("feature rows must share one length"));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(contract("feature entries must be finite"));
            }
        }
        Ok(Self { rows })
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn dimension(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.rows[s]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `Φw`.
    pub fn values(&self, weights: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(weights).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn table(&self) -> Result<FeatureTable> {
        FeatureTable::new(&self.rows)
    }
}

/// A policy-evaluation problem with explicit target and behavior policies.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionProblem {
    pub mdp: TabularMdp,
    pub features: FeatureMatrix,
    /// `target[s][a] = π(a|s)`.
    pub target: Vec<Vec<f64>>,
    /// `behavior[s][a] = π_b(a|s)`.
    pub behavior: Vec<Vec<f64>>,
    /// Distribution of updated states `S_t`.
    pub state_distribution: Vec<f64>,
    pub initial_weights: Vec<f64>,
}

/// One sampled behavior transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictionStep {
    pub action: usize,
    pub next: usize,
    pub reward: f64,
    pub behavior_prob: f64,
    pub rho: f64,
}

impl PredictionProblem {
    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> PredictionStep {
        let probs = &self.behavior[s];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut action = probs.len() - 1;
        for (a, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                action = a;
                break;
            }
        }
        let (next, reward) = self.mdp.step(s, action, rng);
        PredictionStep {
            action,
            next,
            reward,
            behavior_prob: probs[action],
            rho: self.target[s][action] / probs[action],
        }
    }
}

/// States 0..=5 have features `2e_s + e_7`, state 6 has `e_6 + 2e_7`.
/// Dashed jumps to one of states 0..=5 uniformly, solid goes to state 6;
/// every reward is zero. The behavior policy picks dashed or solid with
/// equal probability and the target policy always picks solid, so ρ is 0
/// or 2. Learning runs in sweeps that update every state once, which makes
/// the distribution of updated states uniform. Weights start at
/// `(1,1,1,1,1,1,10,1)`.
pub fn baird_environment() -> PredictionProblem {
    let mut rows = vec![vec![0.0; BAIRD_FEATURES]; BAIRD_STATES];
    for (s, row) in rows.iter_mut().enumerate().take(6) {
        row[s] = 2.0;
        row[7] = 1.0;
    }
    rows[6][6] = 1.0;
    rows[6][7] = 2.0;

    let dashed: Vec<Transition> = (0..6)
        .map(|next| Transition { next, prob: 1.0 / 6.0, reward: 0.0 })
        .collect();
    let solid = vec![Transition { next: 6, prob: 1.0, reward: 0.0 }];
    let transitions = (0..BAIRD_STATES).map(|_| vec![dashed.clone(), solid.clone()]).collect();
    let mdp = TabularMdp::new(BAIRD_GAMMA, transitions, vec![false; BAIRD_STATES])
        .expect("valid construction");

    PredictionProblem {
        mdp,
        features: FeatureMatrix::new(rows).expect("valid construction"),
        target: vec![vec![0.0, 1.0]; BAIRD_STATES],
        behavior: vec![vec![0.5, 0.5]; BAIRD_STATES],
        state_distribution: vec![1.0 / 7.0; BAIRD_STATES],
        initial_weights: vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 10.0, 1.0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_rank() {
        let p = baird_environment();
        assert_eq!(p.features.n_states(), 7);
        assert_eq!(p.features.dimension(), 8);
        let m = nalgebra::DMatrix::from_fn(7, 8, |i, j| p.features.row(i)[j]);
        assert_eq!(m.rank(1e-9), 7);
    }

    #[test]
    fn behavior_is_uniform_over_actions_and_states() {
        let p = baird_environment();
        for s in 0..7 {
            assert_eq!(p.behavior[s], vec![0.5, 0.5]);
            assert_eq!(p.target[s][SOLID], 1.0);
            assert!((p.state_distribution[s] - 1.0 / 7.0).abs() < 1e-15);
        }
        assert!((p.state_distribution.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn true_values_are_zero() {
        let p = baird_environment();
        let v = p.features.values(&[0.0; 8]);
        for s in 0..7 {
            for a in 0..2 {
                assert_eq!(p.mdp.backup(s, a, |n| v[n]), 0.0);
            }
        }
    }

    #[test]
    fn sampled_ratios() {
        use rand::SeedableRng;
        let p = baird_environment();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for s in 0..7 {
            for _ in 0..50 {
                let step = p.sample(s, &mut rng);
                match step.action {
                    SOLID => {
                        assert_eq!(step.next, 6);
                        assert_eq!(step.rho, 2.0);
                    }
                    _ => {
                        assert!(step.next < 6);
                        assert_eq!(step.rho, 0.0);
                    }
                }
            }
        }
    }
}
