//! Field geometry, configuration and the world state value.

use serde::{Deserialize, Serialize};

use crate::error::{SoccerError, SoccerResult};
use crate::geometry::{Pose2D, Vec2};

/// Ball coordinates are snapped to multiples of this (2⁻²⁰ m) after every
/// tick, so sums of ball displacements are exact in `f64`.
pub const BALL_LATTICE: f64 = 1.0 / 1_048_576.0;

pub fn snap(v: f64) -> f64 {
    (v / BALL_LATTICE).round() * BALL_LATTICE
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Home,
    Away,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Home => Side::Away,
            Side::Away => Side::Home,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Home => "home",
            Side::Away => "away",
        }
    }
}

/// Simulator constants. Defaults are the documented desk-scale values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SoccerConfig {
    pub field_length: f64,
    pub field_width: f64,
    pub goal_half_width: f64,
    /// Margin kept between target positions and the field boundary.
    pub margin: f64,
    pub tick_seconds: f64,
    pub ticks_per_decision: u64,
    /// Ticks per game.
    pub game_ticks: u64,
    pub v_max: f64,
    pub control_radius: f64,
    pub p_dribble: f64,
    /// Dribble success when a teammate is within `crowd_radius` of the
    /// player on the ball; crowding teammates get in each other's way.
    pub p_dribble_crowded: f64,
    /// Ball advance per successful dribble tick.
    pub dribble_push: f64,
    /// Maximum ball displacement when a dribble fails.
    pub scatter: f64,
    pub shot_range: f64,
    pub shot_speed: f64,
    /// Half-width of the uniform aim error of a shot.
    pub shot_jitter: f64,
    pub clear_speed: f64,
    /// Velocity factor applied to a moving ball each tick.
    pub ball_friction: f64,
    /// Chance that a defender within control radius stops a moving ball.
    pub p_block: f64,
    /// Per-tick chance that a challenging striker takes the ball from the
    /// team in possession.
    pub p_tackle: f64,
    pub goalie_reach: f64,
    pub goalie_distance: f64,
    pub stopper_offset: f64,
    pub forward_offset: f64,
    pub extra_offset: f64,
    pub wing_fraction: f64,
    pub wing_lateral: f64,
    pub back_fraction: f64,
    pub back_lateral: f64,
    pub striker_w_angle: f64,
    pub striker_w_crowd: f64,
    pub striker_near_radius: f64,
    pub crowd_radius: f64,
    pub crowd_penalty: f64,
    pub step_penalty: f64,
    pub goal_reward: f64,
}

impl Default for SoccerConfig {
    fn default() -> Self {
        Self {
            field_length: 30.0,
            field_width: 20.0,
            goal_half_width: 1.05,
            margin: 0.5,
            tick_seconds: 0.25,
            ticks_per_decision: 8,
            game_ticks: 2400,
            v_max: 0.7,
            control_radius: 0.5,
            p_dribble: 0.6,
            p_dribble_crowded: 0.2,
            dribble_push: 0.25,
            scatter: 1.0,
            shot_range: 10.0,
            shot_speed: 8.0,
            shot_jitter: 1.0,
            clear_speed: 6.0,
            ball_friction: 0.9,
            p_block: 0.5,
            p_tackle: 0.15,
            goalie_reach: 2.0,
            goalie_distance: 1.0,
            stopper_offset: 2.0,
            forward_offset: 2.0,
            extra_offset: 4.0,
            wing_fraction: 0.6,
            wing_lateral: 3.0,
            back_fraction: 0.3,
            back_lateral: 2.5,
            striker_w_angle: 0.5,
            striker_w_crowd: 0.3,
            striker_near_radius: 1.5,
            crowd_radius: 1.5,
            crowd_penalty: 5.0,
            step_penalty: 0.01,
            goal_reward: 100.0,
        }
    }
}

impl SoccerConfig {
    pub fn validate(&self) -> SoccerResult<()> {
        let positive = [
            ("field_length", self.field_length),
            ("field_width", self.field_width),
            ("goal_half_width", self.goal_half_width),
            ("tick_seconds", self.tick_seconds),
            ("v_max", self.v_max),
            ("control_radius", self.control_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SoccerError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, p) in [("p_dribble", self.p_dribble), ("p_dribble_crowded", self.p_dribble_crowded), ("p_block", self.p_block), ("p_tackle", self.p_tackle), ("ball_friction", self.ball_friction)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SoccerError::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.ticks_per_decision == 0 || self.game_ticks == 0 {
            return Err(SoccerError::Config("tick counts must be positive".into()));
        }
        if 2.0 * self.margin >= self.field_width.min(self.field_length) {
            return Err(SoccerError::Config("margin leaves no room on the field".into()));
        }
        if self.goal_half_width >= self.field_width / 2.0 {
            return Err(SoccerError::Config("goal wider than the field".into()));
        }
        Ok(())
    }

    pub fn home_goal(&self) -> Vec2 {
        Vec2::new(-self.field_length / 2.0, 0.0)
    }

    pub fn opponent_goal(&self) -> Vec2 {
        Vec2::new(self.field_length / 2.0, 0.0)
    }

    pub fn diagonal(&self) -> f64 {
        self.field_length.hypot(self.field_width)
    }

    /// Clamps `p` into the field shrunk by `margin` on every side.
    pub fn clamp(&self, p: Vec2, margin: f64) -> Vec2 {
        let hx = self.field_length / 2.0 - margin;
        let hy = self.field_width / 2.0 - margin;
        Vec2::new(p.x.clamp(-hx, hx), p.y.clamp(-hy, hy))
    }

    pub fn contains(&self, p: Vec2, margin: f64) -> bool {
        self.clamp(p, margin) == p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: u32,
    pub pose: Pose2D,
}

impl Agent {
    pub fn position(&self) -> Vec2 {
        self.pose.position()
    }
}

/// The goalie of each team has this id; field players follow from 2.
pub const GOALIE_ID: u32 = 1;

/// Complete simulator state, always expressed from the home team's view:
/// home defends `(−L/2, 0)` and attacks `(L/2, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub ball: Vec2,
    pub ball_velocity: Vec2,
    pub teammates: Vec<Agent>,
    pub opponents: Vec<Agent>,
    pub field_length: f64,
    pub field_width: f64,
    pub tick: u64,
    /// (home, away).
    pub score: (u32, u32),
    /// Team that last played the ball with a dribble, if it is still theirs.
    #[serde(default)]
    pub possession: Option<Side>,
}

impl WorldState {
    /// Kickoff formation for `team_size` agents per side.
    pub fn kickoff(config: &SoccerConfig, team_size: usize) -> SoccerResult<Self> {
        if team_size < 2 {
            return Err(SoccerError::Contract("a team needs a goalie and a field player".into()));
        }
        let mut world = Self {
            ball: Vec2::ZERO,
            ball_velocity: Vec2::ZERO,
            teammates: Vec::new(),
            opponents: Vec::new(),
            field_length: config.field_length,
            field_width: config.field_width,
            tick: 0,
            score: (0, 0),
            possession: None,
        };
        world.teammates = kickoff_team(config, team_size, -1.0);
        world.opponents = kickoff_team(config, team_size, 1.0);
        Ok(world)
    }

    /// Puts ball and agents back in kickoff formation, keeping score and tick.
    pub fn reset_kickoff(&mut self, config: &SoccerConfig) {
        let n = self.teammates.len();
        self.teammates = kickoff_team(config, n, -1.0);
        self.opponents = kickoff_team(config, self.opponents.len(), 1.0);
        self.ball = Vec2::ZERO;
        self.ball_velocity = Vec2::ZERO;
        self.possession = None;
    }

    pub fn home_goal(&self) -> Vec2 {
        Vec2::new(-self.field_length / 2.0, 0.0)
    }

    pub fn opponent_goal(&self) -> Vec2 {
        Vec2::new(self.field_length / 2.0, 0.0)
    }

    pub fn teammate(&self, id: u32) -> SoccerResult<&Agent> {
        self.teammates
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| SoccerError::Contract(format!("unknown teammate {id}")))
    }

    pub fn team(&self, side: Side) -> &[Agent] {
        match side {
            Side::Home => &self.teammates,
            Side::Away => &self.opponents,
        }
    }

    pub fn team_mut(&mut self, side: Side) -> &mut Vec<Agent> {
        match side {
            Side::Home => &mut self.teammates,
            Side::Away => &mut self.opponents,
        }
    }

    /// The same situation seen by the away team: positions rotated by π,
    /// teams and score swapped.
    pub fn mirrored(&self) -> Self {
        let flip = |a: &Agent| Agent {
            id: a.id,
            pose: Pose2D::new(-a.pose.x, -a.pose.y, a.pose.heading + std::f64::consts::PI),
        };
        Self {
            ball: self.ball * -1.0,
            ball_velocity: self.ball_velocity * -1.0,
            teammates: self.opponents.iter().map(flip).collect(),
            opponents: self.teammates.iter().map(flip).collect(),
            field_length: self.field_length,
            field_width: self.field_width,
            tick: self.tick,
            score: (self.score.1, self.score.0),
            possession: self.possession.map(Side::other),
        }
    }

    /// Checks unique ids and that everything lies on the field.
    pub fn validate(&self) -> SoccerResult<()> {
        for team in [&self.teammates, &self.opponents] {
            let mut ids: Vec<u32> = team.iter().map(|a| a.id).collect();
            ids.sort_unstable();
            if ids.windows(2).any(|w| w[0] == w[1]) {
                return Err(SoccerError::Contract("duplicate agent id".into()));
            }
        }
        let hx = self.field_length / 2.0;
        let hy = self.field_width / 2.0;
        let inside = |p: Vec2| p.x.abs() <= hx && p.y.abs() <= hy;
        if !inside(self.ball) || !self.teammates.iter().chain(&self.opponents).all(|a| inside(a.position())) {
            return Err(SoccerError::Contract("object outside the field".into()));
        }
        Ok(())
    }
}

/// `direction` is −1 for the team defending the left goal, +1 for the right.
fn kickoff_team(config: &SoccerConfig, team_size: usize, direction: f64) -> Vec<Agent> {
    let facing = if direction < 0.0 { 0.0 } else { std::f64::consts::PI };
    let goal_x = direction * (config.field_length / 2.0 - config.goalie_distance);
    let mut team = vec![Agent {
        id: GOALIE_ID,
        pose: Pose2D::new(goal_x, 0.0, facing),
    }];
    for k in 0..team_size - 1 {
        let row = (k / 3) as f64;
        let col = (k % 3) as f64 - 1.0;
        // mirror lateral placement so the two kickoffs are point-symmetric
        let x = direction * (1.0 + 3.0 * row + col.abs());
        let y = direction * col * 4.0;
        team.push(Agent {
            id: 2 + k as u32,
            pose: Pose2D::new(x, y, facing),
        });
    }
    team
}
