//! Roles, role assignments and formation target positions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{SoccerError, SoccerResult};
use crate::geometry::Vec2;
use crate::world::{SoccerConfig, WorldState, GOALIE_ID};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    SK,
    FL,
    FR,
    EX1L,
    EX1R,
    ST,
    EX1M,
    WL,
    WR,
    WM,
    BL,
    BR,
    BM,
    GK,
    GKSK,
}

/// The roles a non-striker field player may choose; action `k` is `ACTION_ROLES[k]`.
pub const ACTION_ROLES: [Role; 12] = [
    Role::FL,
    Role::FR,
    Role::EX1L,
    Role::EX1R,
    Role::ST,
    Role::EX1M,
    Role::WL,
    Role::WR,
    Role::WM,
    Role::BL,
    Role::BR,
    Role::BM,
];

pub const NUM_ACTIONS: usize = ACTION_ROLES.len();

impl Role {
    pub const ALL: [Role; 15] = [
        Role::SK,
        Role::FL,
        Role::FR,
        Role::EX1L,
        Role::EX1R,
        Role::ST,
        Role::EX1M,
        Role::WL,
        Role::WR,
        Role::WM,
        Role::BL,
        Role::BR,
        Role::BM,
        Role::GK,
        Role::GKSK,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::SK => "SK",
            Role::FL => "FL",
            Role::FR => "FR",
            Role::EX1L => "EX1L",
            Role::EX1R => "EX1R",
            Role::ST => "ST",
            Role::EX1M => "EX1M",
            Role::WL => "WL",
            Role::WR => "WR",
            Role::WM => "WM",
            Role::BL => "BL",
            Role::BR => "BR",
            Role::BM => "BM",
            Role::GK => "GK",
            Role::GKSK => "GKSK",
        }
    }

    /// Roles that chase the ball instead of holding a formation point.
    pub fn is_active(self) -> bool {
        matches!(self, Role::SK | Role::GKSK)
    }

    pub fn is_goalie_role(self) -> bool {
        matches!(self, Role::GK | Role::GKSK)
    }

    pub fn action_id(self) -> Option<usize> {
        ACTION_ROLES.iter().position(|&r| r == self)
    }

    pub fn from_action(action: usize) -> SoccerResult<Role> {
        ACTION_ROLES
            .get(action)
            .copied()
            .ok_or_else(|| SoccerError::Contract(format!("unknown role action {action}")))
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = SoccerError;
    fn from_str(s: &str) -> SoccerResult<Role> {
        Role::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| SoccerError::Contract(format!("unknown role {s:?}")))
    }
}

/// Teammate id → role, ordered by id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleAssignment(pub BTreeMap<u32, Role>);

impl RoleAssignment {
    pub fn get(&self, id: u32) -> Option<Role> {
        self.0.get(&id).copied()
    }

    pub fn striker(&self) -> Option<u32> {
        self.0.iter().find(|(_, &r)| r == Role::SK).map(|(&id, _)| id)
    }

    /// Exactly one SK, the goalie only in GK/GKSK, nobody else in them, and
    /// every agent of `team` covered.
    pub fn validate(&self, team: &[crate::world::Agent]) -> SoccerResult<()> {
        let bad = |m: String| Err(SoccerError::Contract(m));
        if self.0.len() != team.len() || team.iter().any(|a| !self.0.contains_key(&a.id)) {
            return bad("assignment must cover exactly the team's agents".into());
        }
        let strikers = self.0.values().filter(|&&r| r == Role::SK).count();
        if strikers != 1 {
            return bad(format!("{strikers} strikers assigned"));
        }
        for (&id, &role) in &self.0 {
            if (id == GOALIE_ID) != role.is_goalie_role() {
                return bad(format!("agent {id} cannot take role {role}"));
            }
        }
        Ok(())
    }

    /// `id=ROLE` pairs joined by `;`.
    pub fn to_payload(&self) -> String {
        self.0
            .iter()
            .map(|(id, r)| format!("{id}={r}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn nearest_opponent(world: &WorldState, from: Vec2) -> Option<Vec2> {
    world
        .opponents
        .iter()
        .map(|a| a.position())
        .min_by(|a, b| a.distance(from).total_cmp(&b.distance(from)))
}

/// Point on the home-goal-to-ball vector at `fraction`, shifted sideways by
/// `lateral` (positive = left when facing the opponent goal). The shift grows
/// linearly from 1× with the ball a field length away to 2× at the home goal.
fn along_goal_ball(world: &WorldState, fraction: f64, lateral: f64) -> Vec2 {
    let h = world.home_goal();
    let v = world.ball - h;
    let closeness = (1.0 - v.norm() / world.field_length).max(0.0);
    h + v * fraction + v.unit().perp() * (lateral * (1.0 + closeness))
}

/// Formation point of a reactive role, clamped inside the field margin.
pub fn target_position(role: Role, world: &WorldState, agent_id: u32, config: &SoccerConfig) -> SoccerResult<Vec2> {
    let b = world.ball;
    let raw = match role {
        Role::SK | Role::GKSK => {
            return Err(SoccerError::Contract(format!("{role} has no formation target")));
        }
        Role::FL => b + Vec2::new(0.0, config.forward_offset),
        Role::FR => b - Vec2::new(0.0, config.forward_offset),
        Role::EX1L => b + Vec2::new(0.0, config.extra_offset),
        Role::EX1R => b - Vec2::new(0.0, config.extra_offset),
        Role::ST => b - Vec2::new(config.stopper_offset, 0.0),
        Role::EX1M => {
            let me = world.teammate(agent_id)?.position();
            match nearest_opponent(world, me) {
                Some(c) => (c + b) * 0.5,
                None => b - Vec2::new(config.stopper_offset, 0.0),
            }
        }
        Role::WL => along_goal_ball(world, config.wing_fraction, config.wing_lateral),
        Role::WR => along_goal_ball(world, config.wing_fraction, -config.wing_lateral),
        Role::WM => along_goal_ball(world, config.wing_fraction, 0.0),
        Role::BL => along_goal_ball(world, config.back_fraction, config.back_lateral),
        Role::BR => along_goal_ball(world, config.back_fraction, -config.back_lateral),
        Role::BM => along_goal_ball(world, config.back_fraction, 0.0),
        Role::GK => {
            let h = world.home_goal();
            h + (b - h).unit() * config.goalie_distance
        }
    };
    Ok(config.clamp(raw, config.margin))
}
