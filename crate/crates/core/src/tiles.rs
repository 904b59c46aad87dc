//! Hashed tile coding.
//!
//! Each state variable is normalized to `[0, 1]` and tiled on its own by
//! `num_tilings` one-dimensional grids of width `generalization`, tiling `k`
//! shifted by `k / num_tilings` of a tile. Every (variable, tiling, tile
//! coordinate, action) tuple is hashed into `[0, memory_size - 1)`; index
//! `memory_size - 1` is the bias feature and is always active.
//!
//! The hash is a chain of SplitMix64 finalizers:
//!
//! ```text
//! h = mix(seed)
//! h = mix(h ^ variable); h = mix(h ^ tiling); h = mix(h ^ coord); h = mix(h ^ action)
//! index = h mod (memory_size - 1)
//! ```
//!
//! where `coord` is the signed tile coordinate reinterpreted as `u64` and
//! state-only encodings use `action = u64::MAX`.

use serde::{Deserialize, Serialize};

use crate::encoding::{StateActionEncoder, StateEncoder};
use crate::error::{contract, Result};
use crate::sparse::SparseBinaryVector;

pub const DEFAULT_MEMORY_SIZE: usize = 1_000_001;
pub const DEFAULT_NUM_TILINGS: usize = 16;
pub const DEFAULT_GENERALIZATION: f64 = 1.0 / 16.0;

const NO_ACTION: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileCoderConfig {
    pub memory_size: usize,
    pub num_tilings: usize,
    /// Tile width per variable, in normalized units.
    pub generalization: Vec<f64>,
    pub variable_ranges: Vec<(f64, f64)>,
    pub hash_seed: u64,
    /// Size of the action set accepted by state-action encodings.
    pub num_actions: usize,
}

impl TileCoderConfig {
    /// Default tiling (16 tilings, 1/16 generalization) over the given ranges.
    pub fn new(variable_ranges: Vec<(f64, f64)>, num_actions: usize, hash_seed: u64) -> Self {
        let n = variable_ranges.len();
        Self {
            memory_size: DEFAULT_MEMORY_SIZE,
            num_tilings: DEFAULT_NUM_TILINGS,
            generalization: vec![DEFAULT_GENERALIZATION; n],
            variable_ranges,
            hash_seed,
            num_actions,
        }
    }

    pub fn num_variables(&self) -> usize {
        self.variable_ranges.len()
    }

    /// Nominal active count, bias included.
    pub fn active_count(&self) -> usize {
        self.num_tilings * self.num_variables() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_tilings == 0 {
            return Err(contract("num_tilings must be positive"));
        }
        if self.variable_ranges.is_empty() {
            return Err(contract("at least one state variable is required"));
        }
        if self.memory_size <= self.num_tilings * self.num_variables() {
            return Err(contract(format!(
                "memory size {} cannot hold {} active tiles",
                self.memory_size,
                self.active_count()
            )));
        }
        if self.generalization.len() != self.num_variables() {
            return Err(contract("one generalization width per variable is required"));
        }
        for (k, g) in self.generalization.iter().enumerate() {
            if !(*g > 0.0 && g.is_finite()) {
                return Err(contract(format!("variable {k}: generalization must be positive")));
            }
        }
        for (k, &(lo, hi)) in self.variable_ranges.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(contract(format!("variable {k}: range requires min < max")));
            }
        }
        if self.num_actions == 0 {
            return Err(contract("num_actions must be positive"));
        }
        Ok(())
    }
}

/// Clamps `value` into `range` and maps it onto `[0, 1]`.
pub fn normalize(value: f64, range: (f64, f64)) -> f64 {
    let (lo, hi) = range;
    (value.clamp(lo, hi) - lo) / (hi - lo)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn tile_hash(seed: u64, variable: u64, tiling: u64, coord: i64, action: u64) -> u64 {
    let mut h = splitmix64(seed);
    for part in [variable, tiling, coord as u64, action] {
        h = splitmix64(h ^ part);
    }
    h
}

/// An immutable, validated tile coder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileCoder {
    config: TileCoderConfig,
}

impl TileCoder {
    pub fn new(config: TileCoderConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &TileCoderConfig {
        &self.config
    }

    pub fn memory_size(&self) -> usize {
        self.config.memory_size
    }

    pub fn active_count(&self) -> usize {
        self.config.active_count()
    }

    pub fn bias_index(&self) -> usize {
        self.config.memory_size - 1
    }

    /// Tile coordinate of `value` for one variable and tiling.
    pub fn tile_coordinate(&self, variable: usize, tiling: usize, value: f64) -> i64 {
        let cfg = &self.config;
        let width = cfg.generalization[variable];
        let x = normalize(value, cfg.variable_ranges[variable]);
        let offset = tiling as f64 * width / cfg.num_tilings as f64;
        ((x + offset) / width).floor() as i64
    }

    pub fn encode_state(&self, vars: &[f64]) -> Result<SparseBinaryVector> {
        self.encode(vars, NO_ACTION)
    }

    pub fn encode_state_action(&self, vars: &[f64], action: usize) -> Result<SparseBinaryVector> {
        if action >= self.config.num_actions {
            return Err(contract(format!(
                "unknown action {action} (action set has {})",
                self.config.num_actions
            )));
        }
        self.encode(vars, action as u64)
    }

    fn encode(&self, vars: &[f64], action: u64) -> Result<SparseBinaryVector> {
        let cfg = &self.config;
        if vars.len() != cfg.num_variables() {
            return Err(contract(format!(
                "expected {} state variables, got {}",
                cfg.num_variables(),
                vars.len()
            )));
        }
        if let Some(k) = vars.iter().position(|v| v.is_nan()) {
            return Err(contract(format!("state variable {k} is NaN")));
        }
        let buckets = (cfg.memory_size - 1) as u64;
        let mut indices = Vec::with_capacity(self.active_count());
        for (var, &value) in vars.iter().enumerate() {
            for tiling in 0..cfg.num_tilings {
                let coord = self.tile_coordinate(var, tiling, value);
                let h = tile_hash(cfg.hash_seed, var as u64, tiling as u64, coord, action);
                indices.push((h % buckets) as usize);
            }
        }
        indices.push(self.bias_index());
        SparseBinaryVector::from_indices(cfg.memory_size, indices)
    }
}

impl StateEncoder for TileCoder {
    type Output = SparseBinaryVector;

    fn dimension(&self) -> usize {
        self.config.memory_size
    }

    fn encode(&self, state: &[f64]) -> Result<SparseBinaryVector> {
        self.encode_state(state)
    }
}

impl StateActionEncoder for TileCoder {
    type Output = SparseBinaryVector;

    fn dimension(&self) -> usize {
        self.config.memory_size
    }

    fn num_actions(&self) -> usize {
        self.config.num_actions
    }

    fn encode(&self, state: &[f64], action: usize) -> Result<SparseBinaryVector> {
        self.encode_state_action(state, action)
    }
}
