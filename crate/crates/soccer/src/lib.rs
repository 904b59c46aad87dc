//! A small point-mass soccer world with formation roles, striker
//! selection, state features and shaped rewards.

pub mod error;
pub mod events;
pub mod features;
pub mod geometry;
pub mod policy;
pub mod reward;
pub mod roles;
pub mod sim;
pub mod striker;
pub mod world;

pub use error::{SoccerError, SoccerResult};
pub use events::{read_events, write_events, EventKind, EventRecord, EVENT_HEADER};
pub use features::{state_variables, StateLayout};
pub use geometry::{fold_angle, signed_angle, wrap_angle, Pose2D, Vec2};
pub use policy::{
    hand_coded_roles, policy_by_name, HandCodedPolicy, RandomPolicy, RolePolicy, SimRng, StaticPolicy,
    ROLE_PRIORITY,
};
pub use reward::{crowded, reward_terminal, reward_transient, RewardParts};
pub use roles::{target_position, Role, RoleAssignment, ACTION_ROLES, NUM_ACTIONS};
pub use sim::{complete_assignment, decision_step, step, AgentOutcome, DecisionOutcome, TickEvents};
pub use striker::{assign_striker, striker_cost};
pub use world::{snap, Agent, Side, SoccerConfig, WorldState, BALL_LATTICE, GOALIE_ID};
