//! Experiment configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use gvf_core::tiles::{DEFAULT_MEMORY_SIZE, DEFAULT_NUM_TILINGS};
use gvf_core::{Algorithm, GreedyGqParams, OffPacParams, TileCoderConfig};
use gvf_soccer::{policy_by_name, SoccerConfig, StateLayout, NUM_ACTIONS};

use crate::error::{HarnessError, HarnessResult};

/// Who picks the home team's reactive roles.
pub const LEARNED: &str = "learned";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// `greedy_gq` or `offpac`.
    pub algorithm: String,
    /// `learned`, or a scripted policy name for baseline runs.
    pub home: String,
    /// Played in round robin, one per game.
    pub opponents: Vec<String>,
    /// Agents per side, goalie included.
    pub team_size: usize,
    pub games: usize,
    pub bin_size: usize,
    pub trials: usize,
    pub seed: u64,
    /// One learner for all field players instead of one each.
    pub shared_weights: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            algorithm: "greedy_gq".into(),
            home: LEARNED.into(),
            opponents: vec!["hand_coded".into()],
            team_size: 3,
            games: 200,
            bin_size: 20,
            trials: 1,
            seed: 1,
            shared_weights: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedyGqSection {
    pub gamma: f64,
    pub lambda: f64,
    pub epsilon: f64,
    /// `α_θ = alpha_theta_scale / active features`.
    pub alpha_theta_scale: f64,
    /// `α_w = alpha_w_ratio · α_θ`.
    pub alpha_w_ratio: f64,
}

impl Default for GreedyGqSection {
    fn default() -> Self {
        Self {
            gamma: 0.8,
            lambda: 0.8,
            epsilon: 0.05,
            alpha_theta_scale: 0.01,
            alpha_w_ratio: 0.001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OffPacSection {
    pub gamma: f64,
    pub lambda_critic: f64,
    pub lambda_actor: f64,
    /// Chance per decision that the behavior policy boosts one action.
    pub perturbation: f64,
    pub beta: f64,
    /// `α_v = alpha_v_scale / active features`.
    pub alpha_v_scale: f64,
    /// `α_w = alpha_w_ratio · α_v`.
    pub alpha_w_ratio: f64,
    /// `α_u = alpha_u_scale / active features`.
    pub alpha_u_scale: f64,
}

impl Default for OffPacSection {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            lambda_critic: 0.3,
            lambda_actor: 0.3,
            perturbation: 0.01,
            beta: 0.5,
            alpha_v_scale: 0.01,
            alpha_w_ratio: 0.0001,
            alpha_u_scale: 0.001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TilesSection {
    pub memory_size: usize,
    pub num_tilings: usize,
    /// Tile width in normalized units.
    pub generalization: f64,
    pub hash_seed: u64,
    pub trace_capacity: usize,
}

impl Default for TilesSection {
    fn default() -> Self {
        Self {
            memory_size: DEFAULT_MEMORY_SIZE,
            num_tilings: DEFAULT_NUM_TILINGS,
            generalization: 1.0 / 16.0,
            hash_seed: 0x5eed,
            trace_capacity: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub experience_log: bool,
    pub event_log: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            experience_log: true,
            event_log: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub greedy_gq: GreedyGqSection,
    pub offpac: OffPacSection,
    pub tiles: TilesSection,
    pub soccer: SoccerConfig,
    pub output: OutputSection,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn unit(name: &str, x: f64) -> HarnessResult<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(config_err(format!("{name} must lie in [0, 1], got {x}")))
    }
}

fn positive(name: &str, x: f64) -> HarnessResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> HarnessResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> HarnessResult<()> {
        let e = &self.experiment;
        self.algorithm()?;
        if e.home != LEARNED && policy_by_name(&e.home).is_none() {
            return Err(config_err(format!("unknown home policy {:?}", e.home)));
        }
        if e.opponents.is_empty() {
            return Err(config_err("at least one opponent is required"));
        }
        for o in &e.opponents {
            if policy_by_name(o).is_none() {
                return Err(config_err(format!("unknown opponent {o:?}")));
            }
        }
        if !(3..=11).contains(&e.team_size) {
            return Err(config_err(format!("team_size must lie in [3, 11], got {}", e.team_size)));
        }
        if e.bin_size == 0 || e.games < e.bin_size {
            return Err(config_err(format!(
                "need games >= bin_size > 0, got games = {}, bin_size = {}",
                e.games, e.bin_size
            )));
        }
        if e.trials == 0 {
            return Err(config_err("trials must be positive"));
        }

        let g = &self.greedy_gq;
        unit("greedy_gq.gamma", g.gamma)?;
        unit("greedy_gq.lambda", g.lambda)?;
        unit("greedy_gq.epsilon", g.epsilon)?;
        positive("greedy_gq.alpha_theta_scale", g.alpha_theta_scale)?;
        positive("greedy_gq.alpha_w_ratio", g.alpha_w_ratio)?;

        let o = &self.offpac;
        unit("offpac.gamma", o.gamma)?;
        unit("offpac.lambda_critic", o.lambda_critic)?;
        unit("offpac.lambda_actor", o.lambda_actor)?;
        unit("offpac.perturbation", o.perturbation)?;
        if !o.beta.is_finite() {
            return Err(config_err("offpac.beta must be finite"));
        }
        positive("offpac.alpha_v_scale", o.alpha_v_scale)?;
        positive("offpac.alpha_w_ratio", o.alpha_w_ratio)?;
        positive("offpac.alpha_u_scale", o.alpha_u_scale)?;

        let t = &self.tiles;
        if t.trace_capacity == 0 {
            return Err(config_err("tiles.trace_capacity must be positive"));
        }
        self.tile_config()
            .validate()
            .map_err(|e| config_err(format!("tiles: {e}")))?;

        self.soccer.validate().map_err(|e| config_err(e.to_string()))
    }

    pub fn algorithm(&self) -> HarnessResult<Algorithm> {
        Algorithm::parse(&self.experiment.algorithm).map_err(|e| config_err(e.to_string()))
    }

    pub fn learned(&self) -> bool {
        self.experiment.home == LEARNED
    }

    pub fn layout(&self) -> StateLayout {
        StateLayout::for_team_size(self.experiment.team_size)
    }

    pub fn tile_config(&self) -> TileCoderConfig {
        let ranges = self.layout().ranges(self.soccer.field_length, self.soccer.field_width);
        let mut cfg = TileCoderConfig::new(ranges, NUM_ACTIONS, self.tiles.hash_seed);
        cfg.memory_size = self.tiles.memory_size;
        cfg.num_tilings = self.tiles.num_tilings;
        cfg.generalization = vec![self.tiles.generalization; cfg.variable_ranges.len()];
        cfg
    }

    pub fn greedy_gq_params(&self) -> GreedyGqParams {
        let n = self.tile_config().active_count() as f64;
        let alpha_theta = self.greedy_gq.alpha_theta_scale / n;
        GreedyGqParams {
            alpha_theta,
            alpha_w: self.greedy_gq.alpha_w_ratio * alpha_theta,
            trace_capacity: self.tiles.trace_capacity,
            prune_threshold: gvf_core::sparse::DEFAULT_PRUNE_THRESHOLD,
        }
    }

    pub fn offpac_params(&self) -> OffPacParams {
        let n = self.tile_config().active_count() as f64;
        let alpha_v = self.offpac.alpha_v_scale / n;
        OffPacParams {
            alpha_v,
            alpha_w: self.offpac.alpha_w_ratio * alpha_v,
            alpha_u: self.offpac.alpha_u_scale / n,
            trace_capacity: self.tiles.trace_capacity,
            prune_threshold: gvf_core::sparse::DEFAULT_PRUNE_THRESHOLD,
        }
    }

    /// Seed of trial `k`, spread from the master seed.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        splitmix(self.experiment.seed ^ splitmix(trial as u64 + 1))
    }
}

pub(crate) fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
