use serde::{Deserialize, Serialize};

use super::{check_delta, check_rate, poisoned, Algorithm, Checkpoint, UpdateDiagnostics};
use crate::encoding::StateActionEncoder;
use crate::error::{contract, Result};
use crate::gvf::{corrected_return_target, AnswerFunctions, GvfSample, QuestionFunctions};
use crate::policy::{action_values, argmax_position, importance_ratio_greedy, ActionSet};
use crate::sparse::{DenseWeightVector, EligibilityTrace, DEFAULT_PRUNE_THRESHOLD, DEFAULT_TRACE_CAPACITY};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyGqParams {
    pub alpha_theta: f64,
    pub alpha_w: f64,
    pub trace_capacity: usize,
    pub prune_threshold: f64,
}

impl GreedyGqParams {
    /// `α_θ = 0.01 / active_count`, `α_w = 0.001 · α_θ`.
    pub fn for_active_count(active_count: usize) -> Self {
        let alpha_theta = 0.01 / active_count as f64;
        Self {
            alpha_theta,
            alpha_w: 0.001 * alpha_theta,
            trace_capacity: DEFAULT_TRACE_CAPACITY,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }
}

/// Greedy-GQ(λ) over linear state-action features.
///
/// θ holds the action values, w the gradient-correction weights, e the
/// accumulating trace. All three start at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyGq {
    pub theta: DenseWeightVector,
    pub w: DenseWeightVector,
    pub e: EligibilityTrace,
    params: GreedyGqParams,
    samples: u64,
}

impl GreedyGq {
    pub fn new(dimension: usize, params: GreedyGqParams) -> Result<Self> {
        if dimension == 0 {
            return Err(contract("learner dimension must be positive"));
        }
        check_rate("alpha_theta", params.alpha_theta)?;
        check_rate("alpha_w", params.alpha_w)?;
        Ok(Self {
            theta: DenseWeightVector::zeros(dimension),
            w: DenseWeightVector::zeros(dimension),
            e: EligibilityTrace::with_limits(dimension, params.trace_capacity, params.prune_threshold)?,
            params,
            samples: 0,
        })
    }

    pub fn params(&self) -> &GreedyGqParams {
        &self.params
    }

    pub fn dimension(&self) -> usize {
        self.theta.dimension()
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Clears the trace at the start of an episode; weights are kept.
    pub fn episode_init(&mut self) {
        self.e.clear();
    }

    pub fn predict_q<E: StateActionEncoder>(&self, encoder: &E, state: &[f64], action: usize) -> Result<f64> {
        self.theta.dot(&encoder.encode(state, action)?)
    }

    pub fn greedy_action<E: StateActionEncoder>(
        &self,
        encoder: &E,
        state: &[f64],
        actions: &ActionSet,
    ) -> Result<usize> {
        crate::policy::greedy_action(&self.theta, encoder, state, actions)
    }

    /// One Greedy-GQ(λ) step on `sample`.
    ///
    /// The target policy is greedy in θ; ρ is `1/π_b(A_t|S_t)` when `A_t` is
    /// the greedy action at `S_t` and zero otherwise. γ and λ at `S_t` come
    /// from the question and answer functions, γ at `S_{t+1}` from the
    /// sample.
    pub fn update<E: StateActionEncoder>(
        &mut self,
        sample: &GvfSample,
        question: &QuestionFunctions,
        answer: &AnswerFunctions,
        encoder: &E,
        actions: &ActionSet,
    ) -> Result<UpdateDiagnostics> {
        sample.validate()?;
        if actions.position(sample.action).is_none() {
            return Err(contract(format!("action {} not in the action set", sample.action)));
        }
        let gamma_next = sample.gamma_next;

        // φ̂_{t+1} = φ(S_{t+1}, argmax_b θᵀφ(S_{t+1}, b)); irrelevant when γ' = 0.
        let (next_value, phi_hat) = if gamma_next > 0.0 {
            let values = action_values(&self.theta, encoder, &sample.next_state, actions)?;
            let k = argmax_position(actions, &values);
            (values[k], Some(encoder.encode(&sample.next_state, actions.ids()[k])?))
        } else {
            (0.0, None)
        };

        let phi_t = encoder.encode(&sample.state, sample.action)?;
        let values_t = action_values(&self.theta, encoder, &sample.state, actions)?;
        let q_t = values_t[actions.position(sample.action).unwrap_or(0)];
        let greedy_t = actions.ids()[argmax_position(actions, &values_t)];

        let delta = check_delta(corrected_return_target(sample, next_value) - q_t, self.samples)?;
        let rho = importance_ratio_greedy(sample.action, greedy_t, sample.behavior_prob)?;

        let gamma_t = question.gamma.eval_unit(&sample.state, "gamma")?;
        let lambda_t = answer.lambda.eval_unit(&sample.state, "lambda")?;
        let interest = answer.interest.eval_unit(&sample.state, "interest")?;
        let lambda_next = answer.lambda.eval_unit(&sample.next_state, "lambda")?;

        let samples = self.samples;
        self.e
            .accumulate(gamma_t * lambda_t * rho, interest, &phi_t)
            .map_err(poisoned(samples))?;

        let w_dot_e = self.e.dot(&self.w)?;
        let w_dot_phi = self.w.dot(&phi_t)?;

        let a_theta = self.params.alpha_theta;
        self.theta.axpy_trace(a_theta * delta, &self.e).map_err(poisoned(samples))?;
        if let Some(phi_hat) = &phi_hat {
            let correction = gamma_next * (1.0 - lambda_next) * w_dot_e;
            self.theta
                .axpy_sparse(-a_theta * correction, phi_hat)
                .map_err(poisoned(samples))?;
        }

        let a_w = self.params.alpha_w;
        self.w.axpy_trace(a_w * delta, &self.e).map_err(poisoned(samples))?;
        self.w.axpy_sparse(-a_w * w_dot_phi, &phi_t).map_err(poisoned(samples))?;

        self.samples += 1;
        Ok(UpdateDiagnostics {
            delta,
            rho,
            trace_len: self.e.len(),
            actor_trace_len: 0,
        })
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            algorithm: Algorithm::GreedyGq,
            sample_count: self.samples,
            hyperparameters: vec![
                ("alpha_theta".into(), self.params.alpha_theta),
                ("alpha_w".into(), self.params.alpha_w),
                ("trace_capacity".into(), self.params.trace_capacity as f64),
                ("prune_threshold".into(), self.params.prune_threshold),
            ],
            vectors: vec![("theta".into(), self.theta.clone()), ("w".into(), self.w.clone())],
        }
    }

    /// Restores weights and hyperparameters; the trace starts empty.
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_algorithm(Algorithm::GreedyGq)?;
        let params = GreedyGqParams {
            alpha_theta: ckpt.hyperparameter("alpha_theta")?,
            alpha_w: ckpt.hyperparameter("alpha_w")?,
            trace_capacity: ckpt.hyperparameter("trace_capacity")? as usize,
            prune_threshold: ckpt.hyperparameter("prune_threshold")?,
        };
        let theta = ckpt.vector("theta")?.clone();
        let mut learner = Self::new(theta.dimension(), params)?;
        let w = ckpt.vector("w")?.clone();
        if w.dimension() != theta.dimension() {
            return Err(contract("theta and w dimensions differ in checkpoint"));
        }
        learner.theta = theta;
        learner.w = w;
        learner.samples = ckpt.sample_count;
        Ok(learner)
    }
}
