//! Benchmark drivers. Each returns its metric curve as `(step, metric, value)` rows.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::baird::{baird_environment, PredictionProblem, BAIRD_GAMMA};
use super::mdp::{gridworld, value_iteration};
use super::mspbe::mspbe;
use crate::encoding::{StateActionEncoder, TabularEncoder};
use crate::error::{contract, Result};
use crate::gvf::{AnswerFunctions, GvfSample, QuestionFunctions, TargetPolicy};
use crate::learner::{gibbs_log_gradient, GreedyGq, GreedyGqParams, GtdCritic, OffPac, OffPacParams};
use crate::policy::{epsilon_greedy_sample, softmax, ActionSet};
use crate::sparse::{DenseWeightVector, Features, SparseVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub step: u64,
    pub metric: String,
    pub value: f64,
}

impl MetricRow {
    pub fn new(step: u64, metric: &str, value: f64) -> Self {
        Self {
            step,
            metric: metric.to_string(),
            value,
        }
    }
}

pub const METRIC_HEADER: &str = "step,metric,value";

/// Writes `step,metric,value` lines under a header row.
pub fn write_metric_rows<W: Write>(out: &mut W, rows: &[MetricRow]) -> Result<()> {
    writeln!(out, "{METRIC_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{:.16e}", r.step, r.metric, r.value)?;
    }
    Ok(())
}

fn l2(values: &[f64]) -> f64 {
    values.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BairdConfig {
    pub td_alpha: f64,
    pub td_max_sweeps: u64,
    pub td_norm_limit: f64,
    pub gtd_alpha_v: f64,
    pub gtd_alpha_w: f64,
    pub gtd_lambda: f64,
    pub gtd_max_sweeps: u64,
    pub gtd_mspbe_goal: f64,
    pub record_every: u64,
}

impl Default for BairdConfig {
    fn default() -> Self {
        Self {
            td_alpha: 0.01,
            td_max_sweeps: 5000,
            td_norm_limit: 1e6,
            gtd_alpha_v: 0.001,
            gtd_alpha_w: 0.01,
            gtd_lambda: 0.0,
            gtd_max_sweeps: 20_000,
            gtd_mspbe_goal: 1e-4,
            record_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BairdOutcome {
    /// First sweep at which the goal was met, if any.
    pub reached_at: Option<u64>,
    pub final_norm: f64,
    pub final_mspbe: f64,
    pub rows: Vec<MetricRow>,
}

fn problem_mspbe(p: &PredictionProblem, w: &[f64]) -> Result<f64> {
    mspbe(w, &p.features, &p.mdp, &p.target, &p.state_distribution)
}

/// Off-policy linear TD(0), `w += αρδφ`, until `‖w‖` exceeds the limit.
/// One sweep visits every state once in order with a sampled behavior action.
pub fn run_baird_td0(config: &BairdConfig, seed: u64) -> Result<BairdOutcome> {
    let p = baird_environment();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = p.initial_weights.clone();
    let mut rows = vec![MetricRow::new(0, "td0_norm", l2(&w))];
    let mut reached_at = None;
    for sweep in 1..=config.td_max_sweeps {
        for s in 0..p.features.n_states() {
            let step = p.sample(s, &mut rng);
            let v = p.features.values(&w);
            let delta = step.reward + BAIRD_GAMMA * v[step.next] - v[s];
            let scale = config.td_alpha * step.rho * delta;
            for (wi, phi) in w.iter_mut().zip(p.features.row(s)) {
                *wi += scale * phi;
            }
        }
        let norm = l2(&w);
        if sweep % config.record_every == 0 || norm > config.td_norm_limit || !norm.is_finite() {
            rows.push(MetricRow::new(sweep, "td0_norm", norm));
        }
        if norm > config.td_norm_limit || !norm.is_finite() {
            reached_at = Some(sweep);
            break;
        }
    }
    let final_mspbe = problem_mspbe(&p, &w).unwrap_or(f64::INFINITY);
    Ok(BairdOutcome {
        reached_at,
        final_norm: l2(&w),
        final_mspbe,
        rows,
    })
}

/// GTD(λ) critic of Off-PAC with a frozen always-solid actor.
pub fn run_baird_gtd(config: &BairdConfig, seed: u64) -> Result<BairdOutcome> {
    let p = baird_environment();
    let table = p.features.table()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut critic = GtdCritic::new(
        p.features.dimension(),
        config.gtd_alpha_v,
        config.gtd_alpha_w,
        crate::sparse::DEFAULT_TRACE_CAPACITY,
        crate::sparse::DEFAULT_PRUNE_THRESHOLD,
    )?;
    critic.v = DenseWeightVector::from_values(p.initial_weights.clone())?;

    let mut rows = vec![MetricRow::new(0, "gtd_mspbe", problem_mspbe(&p, critic.v.values())?)];
    let mut reached_at = None;
    let mut samples = 0u64;
    for sweep in 1..=config.gtd_max_sweeps {
        for s in 0..p.features.n_states() {
            let step = p.sample(s, &mut rng);
            let sample = GvfSample::new(
                vec![s as f64],
                step.action,
                step.reward,
                0.0,
                BAIRD_GAMMA,
                vec![step.next as f64],
                step.behavior_prob,
            )?;
            let phi_t = table.row(s);
            let phi_next = table.row(step.next);
            let delta = critic.td_error(&sample, phi_t, phi_next)?;
            critic.step(
                phi_t,
                phi_next,
                delta,
                step.rho,
                BAIRD_GAMMA,
                config.gtd_lambda,
                BAIRD_GAMMA,
                config.gtd_lambda,
                samples,
            )?;
            samples += 1;
        }
        let m = problem_mspbe(&p, critic.v.values())?;
        if sweep % config.record_every == 0 || m < config.gtd_mspbe_goal {
            rows.push(MetricRow::new(sweep, "gtd_mspbe", m));
        }
        if m < config.gtd_mspbe_goal {
            reached_at = Some(sweep);
            break;
        }
    }
    Ok(BairdOutcome {
        reached_at,
        final_norm: critic.v.norm(),
        final_mspbe: problem_mspbe(&p, critic.v.values())?,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridworldConfig {
    pub size: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub alpha_theta: f64,
    pub alpha_w: f64,
    pub max_steps: u64,
    pub max_episode_length: u64,
    pub check_every: u64,
}

impl Default for GridworldConfig {
    fn default() -> Self {
        Self {
            size: 5,
            gamma: 0.95,
            epsilon: 0.1,
            alpha_theta: 0.1,
            alpha_w: 0.01,
            max_steps: 200_000,
            max_episode_length: 200,
            check_every: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridworldOutcome {
    /// First checked step at which every non-terminal greedy action is optimal.
    pub matched_at: Option<u64>,
    pub final_fraction: f64,
    pub rows: Vec<MetricRow>,
}

/// Greedy-GQ(0) on a tabular gridworld with ε-greedy behavior, compared
/// against the value-iteration optimal action sets.
pub fn run_gridworld_greedy_gq(config: &GridworldConfig, seed: u64) -> Result<GridworldOutcome> {
    let mdp = gridworld(config.size, config.gamma)?;
    let oracle = value_iteration(&mdp, 1e-12)?.optimal_sets(1e-9);
    let n = mdp.n_states();
    let encoder = TabularEncoder::new(n, mdp.n_actions());
    let actions = ActionSet::range(mdp.n_actions())?;
    let params = GreedyGqParams {
        alpha_theta: config.alpha_theta,
        alpha_w: config.alpha_w,
        ..GreedyGqParams::for_active_count(1)
    };
    let mut learner = GreedyGq::new(encoder.dimension(), params)?;
    let question = QuestionFunctions::constant(TargetPolicy::Greedy, config.gamma);
    let answer = AnswerFunctions::constant(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let non_terminal: Vec<usize> = (0..n).filter(|&s| !mdp.is_terminal(s)).collect();

    let match_fraction = |learner: &GreedyGq| -> Result<f64> {
        let mut hits = 0;
        for &s in &non_terminal {
            let a = learner.greedy_action(&encoder, &[s as f64], &actions)?;
            if oracle[s].contains(&a) {
                hits += 1;
            }
        }
        Ok(hits as f64 / non_terminal.len() as f64)
    };

    let mut rows = vec![MetricRow::new(0, "policy_match", match_fraction(&learner)?)];
    let mut matched_at = None;
    let mut state = non_terminal[rng.random_range(0..non_terminal.len())];
    let mut episode_len = 0;
    for step in 1..=config.max_steps {
        let s = [state as f64];
        let (a, prob) = epsilon_greedy_sample(&learner.theta, &encoder, &s, &actions, config.epsilon, &mut rng)?;
        let (next, reward) = mdp.step(state, a, &mut rng);
        let gamma_next = if mdp.is_terminal(next) { 0.0 } else { config.gamma };
        let sample = GvfSample::new(s.to_vec(), a, reward, 0.0, gamma_next, vec![next as f64], prob)?;
        learner.update(&sample, &question, &answer, &encoder, &actions)?;
        episode_len += 1;
        if mdp.is_terminal(next) || episode_len >= config.max_episode_length {
            learner.episode_init();
            state = non_terminal[rng.random_range(0..non_terminal.len())];
            episode_len = 0;
        } else {
            state = next;
        }
        if step % config.check_every == 0 {
            let f = match_fraction(&learner)?;
            rows.push(MetricRow::new(step, "policy_match", f));
            if f == 1.0 {
                matched_at = Some(step);
                break;
            }
        }
    }
    Ok(GridworldOutcome {
        matched_at,
        final_fraction: match_fraction(&learner)?,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    /// Bernoulli success probability of each arm; arm 0 is optimal.
    pub arm_means: [f64; 2],
    pub alpha_v: f64,
    pub alpha_w: f64,
    pub alpha_u: f64,
    pub max_updates: u64,
    pub goal: f64,
    pub record_every: u64,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            arm_means: [0.8, 0.2],
            alpha_v: 0.05,
            alpha_w: 0.005,
            alpha_u: 0.05,
            max_updates: 50_000,
            goal: 0.9,
            record_every: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BanditOutcome {
    pub reached_at: Option<u64>,
    pub final_prob: f64,
    pub rows: Vec<MetricRow>,
}

/// Off-PAC on a one-state two-arm bandit with γ = 0 and uniform behavior.
pub fn run_offpac_bandit(config: &BanditConfig, seed: u64) -> Result<BanditOutcome> {
    let state_encoder = TabularEncoder::new(1, 1);
    let action_encoder = TabularEncoder::new(1, 2);
    let actions = ActionSet::range(2)?;
    let params = OffPacParams {
        alpha_v: config.alpha_v,
        alpha_w: config.alpha_w,
        alpha_u: config.alpha_u,
        ..OffPacParams::for_active_count(1)
    };
    let mut learner = OffPac::new(1, 2, params)?;
    let question = QuestionFunctions::constant(TargetPolicy::Gibbs, 0.0);
    let answer = AnswerFunctions::constant(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let optimal_prob = |learner: &OffPac| -> Result<f64> {
        Ok(learner.actor.policy(&action_encoder, &[0.0], &actions)?.prob(0))
    };
    let mut rows = vec![MetricRow::new(0, "optimal_prob", optimal_prob(&learner)?)];
    let mut reached_at = None;
    for step in 1..=config.max_updates {
        let a = rng.random_range(0..2);
        let reward = if rng.random::<f64>() < config.arm_means[a] { 1.0 } else { 0.0 };
        let sample = GvfSample::new(vec![0.0], a, reward, 0.0, 0.0, vec![0.0], 0.5)?;
        learner.update(&sample, &question, &answer, &state_encoder, &action_encoder, &actions)?;
        let p = optimal_prob(&learner)?;
        if step % config.record_every == 0 || (p > config.goal && reached_at.is_none()) {
            rows.push(MetricRow::new(step, "optimal_prob", p));
        }
        if p > config.goal && reached_at.is_none() {
            reached_at = Some(step);
            break;
        }
    }
    Ok(BanditOutcome {
        reached_at,
        final_prob: optimal_prob(&learner)?,
        rows,
    })
}

/// Dense random features `φ(s, a)`; the state argument is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedActionFeatures {
    rows: Vec<SparseVector>,
    dimension: usize,
}

impl FixedActionFeatures {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dimension = rows.first().map(Vec::len).unwrap_or(0);
        if dimension == 0 || rows.iter().any(|r| r.len() != dimension) {
            return Err(contract("feature rows must be non-empty and share one length"));
        }
        Ok(Self {
            rows: rows.iter().map(|r| SparseVector::from_dense(r)).collect::<Result<_>>()?,
            dimension,
        })
    }
}

impl StateActionEncoder for FixedActionFeatures {
    type Output = SparseVector;

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn num_actions(&self) -> usize {
        self.rows.len()
    }

    fn encode(&self, _state: &[f64], action: usize) -> Result<SparseVector> {
        self.rows
            .get(action)
            .cloned()
            .ok_or_else(|| contract(format!("unknown action {action}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub max_relative_error: f64,
    pub max_identity_error: f64,
    pub rows: Vec<MetricRow>,
}

fn log_prob(u: &[f64], features: &[Vec<f64>], action: usize) -> f64 {
    let prefs: Vec<f64> = features
        .iter()
        .map(|f| f.iter().zip(u).map(|(a, b)| a * b).sum())
        .collect();
    let max = prefs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + prefs.iter().map(|p| (p - max).exp()).sum::<f64>().ln();
    prefs[action] - lse
}

/// Compares the analytic Gibbs score against central differences of
/// `ln π` on random linear problems, and checks `Σ_a π(a)∇ln π(a) = 0`.
pub fn gradient_check(draws: usize, h: f64, seed: u64) -> Result<GradientReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut max_rel: f64 = 0.0;
    let mut max_id: f64 = 0.0;
    for draw in 0..draws {
        let dim = rng.random_range(2..9);
        let n_actions = rng.random_range(2..7);
        let feats: Vec<Vec<f64>> = (0..n_actions)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let encoder = FixedActionFeatures::new(&feats)?;
        let actions = ActionSet::range(n_actions)?;
        let weights = DenseWeightVector::from_values(u.clone())?;
        let action = rng.random_range(0..n_actions);

        let grad = gibbs_log_gradient(&weights, &encoder, &[], action, &actions)?;
        let mut analytic = vec![0.0; dim];
        for (i, v) in grad.entries() {
            analytic[i] = v;
        }
        let numeric: Vec<f64> = (0..dim)
            .map(|i| {
                let mut up = u.clone();
                let mut down = u.clone();
                up[i] += h;
                down[i] -= h;
                (log_prob(&up, &feats, action) - log_prob(&down, &feats, action)) / (2.0 * h)
            })
            .collect();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
        let scale = l2(&analytic).max(l2(&numeric)).max(1e-12);
        let rel = l2(&diff) / scale;
        max_rel = max_rel.max(rel);

        let prefs: Vec<f64> = feats
            .iter()
            .map(|f| f.iter().zip(&u).map(|(a, b)| a * b).sum())
            .collect();
        let pi = softmax(&prefs);
        let mut total = vec![0.0; dim];
        for b in 0..n_actions {
            let g = gibbs_log_gradient(&weights, &encoder, &[], b, &actions)?;
            for (i, v) in g.entries() {
                total[i] += pi[b] * v;
            }
        }
        let id = total.iter().map(|x| x.abs()).fold(0.0, f64::max);
        max_id = max_id.max(id);

        rows.push(MetricRow::new(draw as u64, "relative_error", rel));
        rows.push(MetricRow::new(draw as u64, "score_identity", id));
    }
    rows.push(MetricRow::new(draws as u64, "max_relative_error", max_rel));
    rows.push(MetricRow::new(draws as u64, "max_score_identity", max_id));
    Ok(GradientReport {
        max_relative_error: max_rel,
        max_identity_error: max_id,
        rows,
    })
}
