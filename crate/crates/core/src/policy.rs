//! Target and behavior policies over linear action values and preferences.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::StateActionEncoder;
use crate::error::{contract, Result};
use crate::sparse::DenseWeightVector;

/// Ordered, duplicate-free set of action ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSet {
    ids: Vec<usize>,
}

impl ActionSet {
    pub fn new(ids: Vec<usize>) -> Result<Self> {
        if ids.is_empty() {
            return Err(contract("action set must not be empty"));
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ids.len() {
            return Err(contract("action ids must be unique"));
        }
        Ok(Self { ids })
    }

    /// Actions `0..n`.
    pub fn range(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, action: usize) -> Option<usize> {
        self.ids.iter().position(|&a| a == action)
    }
}

/// Probabilities aligned with the order of an [`ActionSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    actions: Vec<usize>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(actions: &ActionSet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != actions.len() {
            return Err(contract("one probability per action is required"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(contract("probabilities must lie in [0, 1]"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(contract(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            actions: actions.ids().to_vec(),
            probs,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// Probability of `action`; zero for actions outside the support set.
    pub fn prob(&self, action: usize) -> f64 {
        self.actions
            .iter()
            .position(|&a| a == action)
            .map_or(0.0, |k| self.probs[k])
    }

    /// Inverse-CDF sample; returns the action and its probability.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let k = sample_index(&self.probs, rng);
        (self.actions[k], self.probs[k])
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the final partial sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// `wᵀφ(s, a)` for every action, in action-set order.
pub fn action_values<E: StateActionEncoder>(
    weights: &DenseWeightVector,
    encoder: &E,
    state: &[f64],
    actions: &ActionSet,
) -> Result<Vec<f64>> {
    actions
        .ids()
        .iter()
        .map(|&a| weights.dot(&encoder.encode(state, a)?))
        .collect()
}

/// Position of the largest value; ties go to the lowest action id.
pub fn argmax_position(actions: &ActionSet, values: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..values.len() {
        let better = values[k] > values[best]
            || (values[k] == values[best] && actions.ids()[k] < actions.ids()[best]);
        if better {
            best = k;
        }
    }
    best
}

/// `argmax_b θᵀφ(s, b)`, lowest id on ties.
pub fn greedy_action<E: StateActionEncoder>(
    theta: &DenseWeightVector,
    encoder: &E,
    state: &[f64],
    actions: &ActionSet,
) -> Result<usize> {
    let values = action_values(theta, encoder, state, actions)?;
    Ok(actions.ids()[argmax_position(actions, &values)])
}

/// ε-greedy distribution around `greedy`.
pub fn epsilon_greedy_distribution(
    greedy: usize,
    actions: &ActionSet,
    epsilon: f64,
) -> Result<DiscreteDistribution> {
    check_unit("epsilon", epsilon)?;
    let n = actions.len() as f64;
    let probs = actions
        .ids()
        .iter()
        .map(|&a| if a == greedy { 1.0 - epsilon + epsilon / n } else { epsilon / n })
        .collect();
    DiscreteDistribution::new(actions, probs)
}

/// Samples from the ε-greedy policy around the current greedy action.
///
/// Returns the chosen action and its exact sampling probability
/// `(1 - ε)·[a = greedy] + ε/|A|`.
pub fn epsilon_greedy_sample<E: StateActionEncoder, R: Rng + ?Sized>(
    theta: &DenseWeightVector,
    encoder: &E,
    state: &[f64],
    actions: &ActionSet,
    epsilon: f64,
    rng: &mut R,
) -> Result<(usize, f64)> {
    check_unit("epsilon", epsilon)?;
    let greedy = greedy_action(theta, encoder, state, actions)?;
    let n = actions.len();
    let chosen = if rng.random::<f64>() < epsilon {
        actions.ids()[rng.random_range(0..n)]
    } else {
        greedy
    };
    let mut prob = epsilon / n as f64;
    if chosen == greedy {
        prob += 1.0 - epsilon;
    }
    Ok((chosen, prob))
}

/// Numerically stable softmax.
pub fn softmax(preferences: &[f64]) -> Vec<f64> {
    let max = preferences.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = preferences.iter().map(|p| (p - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `π(a|s) = exp(uᵀφ(s,a)) / Σ_b exp(uᵀφ(s,b))`.
pub fn gibbs_distribution<E: StateActionEncoder>(
    u: &DenseWeightVector,
    encoder: &E,
    state: &[f64],
    actions: &ActionSet,
) -> Result<DiscreteDistribution> {
    let prefs = action_values(u, encoder, state, actions)?;
    DiscreteDistribution::new(actions, softmax(&prefs))
}

/// Softmax with `beta` added to the preference at position `boosted`.
pub fn boosted_softmax(preferences: &[f64], boosted: usize, beta: f64) -> Vec<f64> {
    let mut prefs = preferences.to_vec();
    prefs[boosted] += beta;
    softmax(&prefs)
}

/// Marginal distribution of the perturbed Gibbs behavior policy.
///
/// With probability `1 - perturb_prob` the plain softmax is used; otherwise
/// one action, chosen uniformly, has `beta` added to its preference.
pub fn perturbed_gibbs_probabilities(
    preferences: &[f64],
    perturb_prob: f64,
    beta: f64,
) -> Result<Vec<f64>> {
    check_unit("perturbation probability", perturb_prob)?;
    if !beta.is_finite() {
        return Err(contract("beta must be finite"));
    }
    let n = preferences.len();
    let base = softmax(preferences);
    let mut mixture: Vec<f64> = base.iter().map(|p| (1.0 - perturb_prob) * p).collect();
    if perturb_prob > 0.0 {
        let share = perturb_prob / n as f64;
        for k in 0..n {
            for (m, p) in mixture.iter_mut().zip(boosted_softmax(preferences, k, beta)) {
                *m += share * p;
            }
        }
    }
    Ok(mixture)
}

/// Samples from the perturbed Gibbs behavior policy.
///
/// Returns the action and its marginal probability under the mixture, so
/// that importance ratios against the unperturbed Gibbs target are exact.
pub fn perturbed_gibbs_sample<E: StateActionEncoder, R: Rng + ?Sized>(
    u: &DenseWeightVector,
    encoder: &E,
    state: &[f64],
    actions: &ActionSet,
    perturb_prob: f64,
    beta: f64,
    rng: &mut R,
) -> Result<(usize, f64)> {
    let prefs = action_values(u, encoder, state, actions)?;
    let mixture = perturbed_gibbs_probabilities(&prefs, perturb_prob, beta)?;
    let branch = if rng.random::<f64>() < perturb_prob {
        boosted_softmax(&prefs, rng.random_range(0..prefs.len()), beta)
    } else {
        softmax(&prefs)
    };
    let k = sample_index(&branch, rng);
    Ok((actions.ids()[k], mixture[k]))
}

/// ρ for a greedy target: `1/π_b` when the behavior took the greedy action, else 0.
pub fn importance_ratio_greedy(chosen: usize, greedy: usize, behavior_prob: f64) -> Result<f64> {
    check_behavior(behavior_prob)?;
    Ok(if chosen == greedy { 1.0 / behavior_prob } else { 0.0 })
}

/// `ρ = π / π_b`.
pub fn importance_ratio(target_prob: f64, behavior_prob: f64) -> Result<f64> {
    check_behavior(behavior_prob)?;
    check_unit("target probability", target_prob)?;
    Ok(target_prob / behavior_prob)
}

fn check_behavior(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(contract(format!(
            "behavior probability {p} must lie in (0, 1]; behavior must cover the target"
        )))
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(contract(format!("{name} {x} outside [0, 1]")))
    }
}
