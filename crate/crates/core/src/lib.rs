//! Off-policy gradient temporal-difference learners over sparse features.
//!
//! Greedy-GQ(λ) learns greedy action values, Off-PAC learns a Gibbs policy
//! with a GTD(λ) critic. Features come from a hashed tile coder or from the
//! small exact encoders used by the benchmark environments.

pub mod bench;
pub mod encoding;
pub mod error;
pub mod gvf;
pub mod learner;
pub mod policy;
pub mod sparse;
pub mod tiles;
pub mod weights_io;

pub use encoding::{FeatureTable, StateActionEncoder, StateEncoder, TabularEncoder};
pub use error::{GvfError, Result};
pub use gvf::{
    AnswerFunctions, ExperienceRecord, GvfSample, QuestionFunctions, StateFn, TargetPolicy,
};
pub use learner::{
    Algorithm, Checkpoint, GibbsActor, GreedyGq, GreedyGqParams, GtdCritic, OffPac, OffPacParams,
    UpdateDiagnostics,
};
pub use policy::ActionSet;
pub use sparse::{DenseWeightVector, EligibilityTrace, Features, SparseBinaryVector, SparseVector};
pub use tiles::{TileCoder, TileCoderConfig};
