use serde::{Deserialize, Serialize};

use super::{check_delta, check_rate, poisoned, Algorithm, Checkpoint, UpdateDiagnostics};
use crate::encoding::{StateActionEncoder, StateEncoder};
use crate::error::{contract, Result};
use crate::gvf::{corrected_return_target, AnswerFunctions, GvfSample, QuestionFunctions};
use crate::policy::{gibbs_distribution, importance_ratio, ActionSet, DiscreteDistribution};
use crate::sparse::{
    DenseWeightVector, EligibilityTrace, Features, SparseVector, DEFAULT_PRUNE_THRESHOLD,
    DEFAULT_TRACE_CAPACITY,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffPacParams {
    pub alpha_v: f64,
    pub alpha_w: f64,
    pub alpha_u: f64,
    pub trace_capacity: usize,
    pub prune_threshold: f64,
}

impl OffPacParams {
    /// `α_v = 0.01/n`, `α_w = 0.0001·α_v`, `α_u = 0.001/n` for `n` active features.
    pub fn for_active_count(active_count: usize) -> Self {
        let n = active_count as f64;
        let alpha_v = 0.01 / n;
        Self {
            alpha_v,
            alpha_w: 0.0001 * alpha_v,
            alpha_u: 0.001 / n,
            trace_capacity: DEFAULT_TRACE_CAPACITY,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }
}

/// `∇_u ln π(a|s) = φ(s,a) − Σ_b π(b|s) φ(s,b)` for a Gibbs policy.
pub fn gibbs_log_gradient<E: StateActionEncoder>(
    u: &DenseWeightVector,
    encoder: &E,
    state: &[f64],
    action: usize,
    actions: &ActionSet,
) -> Result<SparseVector> {
    let pi = gibbs_distribution(u, encoder, state, actions)?;
    log_gradient_given(&pi, encoder, state, action, actions)
}

fn log_gradient_given<E: StateActionEncoder>(
    pi: &DiscreteDistribution,
    encoder: &E,
    state: &[f64],
    action: usize,
    actions: &ActionSet,
) -> Result<SparseVector> {
    if actions.position(action).is_none() {
        return Err(contract(format!("action {action} not in the action set")));
    }
    let mut pairs: Vec<(usize, f64)> = encoder.encode(state, action)?.entries().collect();
    for (&b, &p) in actions.ids().iter().zip(pi.probabilities()) {
        if p == 0.0 {
            continue;
        }
        pairs.extend(encoder.encode(state, b)?.entries().map(|(i, v)| (i, -p * v)));
    }
    SparseVector::from_pairs(encoder.dimension(), pairs)
}

/// GTD(λ) critic: value weights v, correction weights w, trace e_v.
#[derive(Clone, Debug, PartialEq)]
pub struct GtdCritic {
    pub v: DenseWeightVector,
    pub w: DenseWeightVector,
    pub e: EligibilityTrace,
    pub alpha_v: f64,
    pub alpha_w: f64,
}

impl GtdCritic {
    pub fn new(
        dimension: usize,
        alpha_v: f64,
        alpha_w: f64,
        trace_capacity: usize,
        prune_threshold: f64,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(contract("critic dimension must be positive"));
        }
        check_rate("alpha_v", alpha_v)?;
        check_rate("alpha_w", alpha_w)?;
        Ok(Self {
            v: DenseWeightVector::zeros(dimension),
            w: DenseWeightVector::zeros(dimension),
            e: EligibilityTrace::with_limits(dimension, trace_capacity, prune_threshold)?,
            alpha_v,
            alpha_w,
        })
    }

    /// `δ = r + (1−γ')z + γ'vᵀφ_{t+1} − vᵀφ_t`.
    pub fn td_error<F: Features>(&self, sample: &GvfSample, phi_t: &F, phi_next: &F) -> Result<f64> {
        let next = if sample.gamma_next > 0.0 { self.v.dot(phi_next)? } else { 0.0 };
        Ok(corrected_return_target(sample, next) - self.v.dot(phi_t)?)
    }

    /// Applies one critic step with a precomputed δ and ρ.
    ///
    /// `e ← ρ(φ_t + γ_t λ_t e)`,
    /// `v += α_v[δe − γ'(1−λ')(eᵀw)φ_{t+1}]`,
    /// `w += α_w[δe − (wᵀφ_t)φ_t]`.
    #[allow(clippy::too_many_arguments)]
    pub fn step<F: Features>(
        &mut self,
        phi_t: &F,
        phi_next: &F,
        delta: f64,
        rho: f64,
        gamma_t: f64,
        lambda_t: f64,
        gamma_next: f64,
        lambda_next: f64,
        samples: u64,
    ) -> Result<()> {
        self.e
            .accumulate(rho * gamma_t * lambda_t, rho, phi_t)
            .map_err(poisoned(samples))?;
        let e_dot_w = self.e.dot(&self.w)?;
        let w_dot_phi = self.w.dot(phi_t)?;

        self.v.axpy_trace(self.alpha_v * delta, &self.e).map_err(poisoned(samples))?;
        let correction = gamma_next * (1.0 - lambda_next) * e_dot_w;
        self.v
            .axpy_sparse(-self.alpha_v * correction, phi_next)
            .map_err(poisoned(samples))?;

        self.w.axpy_trace(self.alpha_w * delta, &self.e).map_err(poisoned(samples))?;
        self.w
            .axpy_sparse(-self.alpha_w * w_dot_phi, phi_t)
            .map_err(poisoned(samples))?;
        Ok(())
    }
}

/// Gibbs actor: preference weights u and trace e_u.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsActor {
    pub u: DenseWeightVector,
    pub e: EligibilityTrace,
    pub alpha_u: f64,
}

impl GibbsActor {
    pub fn new(dimension: usize, alpha_u: f64, trace_capacity: usize, prune_threshold: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(contract("actor dimension must be positive"));
        }
        check_rate("alpha_u", alpha_u)?;
        Ok(Self {
            u: DenseWeightVector::zeros(dimension),
            e: EligibilityTrace::with_limits(dimension, trace_capacity, prune_threshold)?,
            alpha_u,
        })
    }

    pub fn policy<E: StateActionEncoder>(
        &self,
        encoder: &E,
        state: &[f64],
        actions: &ActionSet,
    ) -> Result<DiscreteDistribution> {
        gibbs_distribution(&self.u, encoder, state, actions)
    }
}

/// Off-PAC: GTD(λ) critic over state features, Gibbs actor over
/// state-action features.
#[derive(Clone, Debug, PartialEq)]
pub struct OffPac {
    pub critic: GtdCritic,
    pub actor: GibbsActor,
    params: OffPacParams,
    samples: u64,
}

impl OffPac {
    pub fn new(state_dimension: usize, action_dimension: usize, params: OffPacParams) -> Result<Self> {
        Ok(Self {
            critic: GtdCritic::new(
                state_dimension,
                params.alpha_v,
                params.alpha_w,
                params.trace_capacity,
                params.prune_threshold,
            )?,
            actor: GibbsActor::new(
                action_dimension,
                params.alpha_u,
                params.trace_capacity,
                params.prune_threshold,
            )?,
            params,
            samples: 0,
        })
    }

    pub fn params(&self) -> &OffPacParams {
        &self.params
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn episode_init(&mut self) {
        self.critic.e.clear();
        self.actor.e.clear();
    }

    pub fn predict_v<S: StateEncoder>(&self, encoder: &S, state: &[f64]) -> Result<f64> {
        self.critic.v.dot(&encoder.encode(state)?)
    }

    /// One Off-PAC step.
    ///
    /// The critic trace uses λ at `S_t` and the v-correction λ at
    /// `S_{t+1}`; the actor trace decays by `γ(S_t)·λ_actor(S_{t+1})`.
    #[allow(clippy::too_many_arguments)]
    pub fn update<S: StateEncoder, E: StateActionEncoder>(
        &mut self,
        sample: &GvfSample,
        question: &QuestionFunctions,
        answer: &AnswerFunctions,
        state_encoder: &S,
        action_encoder: &E,
        actions: &ActionSet,
    ) -> Result<UpdateDiagnostics> {
        sample.validate()?;
        let phi_t = state_encoder.encode(&sample.state)?;
        let phi_next = state_encoder.encode(&sample.next_state)?;

        let delta = check_delta(self.critic.td_error(sample, &phi_t, &phi_next)?, self.samples)?;
        let pi = self.actor.policy(action_encoder, &sample.state, actions)?;
        if actions.position(sample.action).is_none() {
            return Err(contract(format!("action {} not in the action set", sample.action)));
        }
        let rho = importance_ratio(pi.prob(sample.action), sample.behavior_prob)?;

        let gamma_t = question.gamma.eval_unit(&sample.state, "gamma")?;
        let lambda_t = answer.lambda.eval_unit(&sample.state, "lambda")?;
        let lambda_next = answer.lambda.eval_unit(&sample.next_state, "lambda")?;
        let actor_lambda_next = answer.actor_lambda.eval_unit(&sample.next_state, "actor lambda")?;

        let samples = self.samples;
        self.critic.step(
            &phi_t,
            &phi_next,
            delta,
            rho,
            gamma_t,
            lambda_t,
            sample.gamma_next,
            lambda_next,
            samples,
        )?;

        let grad = log_gradient_given(&pi, action_encoder, &sample.state, sample.action, actions)?;
        self.actor
            .e
            .accumulate(rho * gamma_t * actor_lambda_next, rho, &grad)
            .map_err(poisoned(samples))?;
        self.actor
            .u
            .axpy_trace(self.actor.alpha_u * delta, &self.actor.e)
            .map_err(poisoned(samples))?;

        self.samples += 1;
        Ok(UpdateDiagnostics {
            delta,
            rho,
            trace_len: self.critic.e.len(),
            actor_trace_len: self.actor.e.len(),
        })
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            algorithm: Algorithm::OffPac,
            sample_count: self.samples,
            hyperparameters: vec![
                ("alpha_v".into(), self.params.alpha_v),
                ("alpha_w".into(), self.params.alpha_w),
                ("alpha_u".into(), self.params.alpha_u),
                ("trace_capacity".into(), self.params.trace_capacity as f64),
                ("prune_threshold".into(), self.params.prune_threshold),
            ],
            vectors: vec![
                ("v".into(), self.critic.v.clone()),
                ("w".into(), self.critic.w.clone()),
                ("u".into(), self.actor.u.clone()),
            ],
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_algorithm(Algorithm::OffPac)?;
        let params = OffPacParams {
            alpha_v: ckpt.hyperparameter("alpha_v")?,
            alpha_w: ckpt.hyperparameter("alpha_w")?,
            alpha_u: ckpt.hyperparameter("alpha_u")?,
            trace_capacity: ckpt.hyperparameter("trace_capacity")? as usize,
            prune_threshold: ckpt.hyperparameter("prune_threshold")?,
        };
        let v = ckpt.vector("v")?.clone();
        let w = ckpt.vector("w")?.clone();
        let u = ckpt.vector("u")?.clone();
        if v.dimension() != w.dimension() {
            return Err(contract("v and w dimensions differ in checkpoint"));
        }
        let mut learner = Self::new(v.dimension(), u.dimension(), params)?;
        learner.critic.v = v;
        learner.critic.w = w;
        learner.actor.u = u;
        learner.samples = ckpt.sample_count;
        Ok(learner)
    }
}
