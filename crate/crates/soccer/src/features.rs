//! State variables seen by a role-choosing agent.
//!
//! Order, for `n_start..=n_end` teammate slots and `m_max` opponent slots:
//!
//! ```text
//! |hb|, |bo|, ∠hbo,
//! per teammate slot:  |a_i b|, ∠y_i a_i b, ∠a_i b x
//! per opponent slot:  |c_j b|, ∠c_j b x
//! ```
//!
//! Teammate slot 1 is the goalie, slot 2 the observing agent, then the
//! other field players by ascending id. Opponent slots hold opponents
//! sorted by distance to the ball (ties by id); empty slots read as
//! `(field diagonal, 0)`. Every angle is a signed angle folded into
//! `(−π/2, π/2]` by halving.

use crate::error::{SoccerError, SoccerResult};
use crate::geometry::{fold_angle, signed_angle, Vec2};
use crate::world::{Agent, WorldState, GOALIE_ID};

/// Slot layout of the state vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateLayout {
    pub n_start: usize,
    pub n_end: usize,
    pub m_max: usize,
}

impl StateLayout {
    /// Layout for `team_size` a side: every field player and every opponent.
    pub fn for_team_size(team_size: usize) -> Self {
        Self {
            n_start: 2,
            n_end: team_size,
            m_max: team_size,
        }
    }

    pub fn len(&self) -> usize {
        3 + 3 * (self.n_end + 1 - self.n_start) + 2 * self.m_max
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(min, max)` per variable for tile-coder normalization.
    pub fn ranges(&self, field_length: f64, field_width: f64) -> Vec<(f64, f64)> {
        let d = (0.0, field_length.hypot(field_width));
        let a = (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        let mut r = vec![d, d, a];
        for _ in self.n_start..=self.n_end {
            r.extend([d, a, a]);
        }
        for _ in 0..self.m_max {
            r.extend([d, a]);
        }
        r
    }
}

fn slot_order(world: &WorldState, agent_id: u32) -> SoccerResult<Vec<&Agent>> {
    let me = world.teammate(agent_id)?;
    let mut order: Vec<&Agent> = Vec::with_capacity(world.teammates.len());
    if let Ok(g) = world.teammate(GOALIE_ID) {
        order.push(g);
    }
    if agent_id != GOALIE_ID {
        order.push(me);
    }
    let mut rest: Vec<&Agent> = world
        .teammates
        .iter()
        .filter(|a| a.id != agent_id && a.id != GOALIE_ID)
        .collect();
    rest.sort_by_key(|a| a.id);
    order.extend(rest);
    Ok(order)
}

pub fn state_variables(world: &WorldState, agent_id: u32, layout: StateLayout) -> SoccerResult<Vec<f64>> {
    let order = slot_order(world, agent_id)?;
    if layout.n_start == 0 || layout.n_start > layout.n_end || layout.n_end > order.len() {
        return Err(SoccerError::Contract(format!(
            "teammate slots {}..={} do not fit a team of {}",
            layout.n_start,
            layout.n_end,
            order.len()
        )));
    }
    let b = world.ball;
    let h = world.home_goal();
    let o = world.opponent_goal();
    let x_axis = Vec2::new(1.0, 0.0);
    let diag = world.field_length.hypot(world.field_width);

    let mut out = Vec::with_capacity(layout.len());
    out.push(h.distance(b));
    out.push(b.distance(o));
    out.push(fold_angle(signed_angle(h - b, o - b)));
    for agent in &order[layout.n_start - 1..layout.n_end] {
        let a = agent.position();
        let heading = Vec2::from_angle(agent.pose.heading);
        out.push(a.distance(b));
        out.push(fold_angle(signed_angle(heading, b - a)));
        out.push(fold_angle(signed_angle(x_axis, a - b)));
    }
    let mut opponents: Vec<&Agent> = world.opponents.iter().collect();
    opponents.sort_by(|p, q| {
        p.position()
            .distance(b)
            .total_cmp(&q.position().distance(b))
            .then(p.id.cmp(&q.id))
    });
    for j in 0..layout.m_max {
        match opponents.get(j) {
            Some(c) => {
                out.push(c.position().distance(b));
                out.push(fold_angle(signed_angle(x_axis, c.position() - b)));
            }
            None => out.extend([diag, 0.0]),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2D;
    use crate::world::SoccerConfig;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn collinear_goals_fold_to_half_pi() {
        let w = WorldState::kickoff(&SoccerConfig::default(), 3).unwrap();
        let s = state_variables(&w, 2, StateLayout::for_team_size(3)).unwrap();
        assert_eq!(s.len(), 15);
        assert_eq!(s[0], 15.0);
        assert_eq!(s[1], 15.0);
        assert_eq!(s[2], FRAC_PI_2);
    }

    #[test]
    fn hand_computed_three_v_three() {
        let cfg = SoccerConfig::default();
        let mut w = WorldState::kickoff(&cfg, 3).unwrap();
        w.ball = Vec2::new(3.0, 4.0);
        // goalie 1, self 2 on the ball facing +x, teammate 3 below the ball facing it
        w.teammates = vec![
            Agent { id: 1, pose: Pose2D::new(-14.0, 0.0, 0.0) },
            Agent { id: 2, pose: Pose2D::new(3.0, 4.0, 0.0) },
            Agent { id: 3, pose: Pose2D::new(3.0, 1.0, FRAC_PI_2) },
        ];
        w.opponents = vec![
            Agent { id: 1, pose: Pose2D::new(14.0, 0.0, PI) },
            Agent { id: 2, pose: Pose2D::new(5.0, 4.0, PI) },
            Agent { id: 3, pose: Pose2D::new(3.0, 8.0, PI) },
        ];
        let s = state_variables(&w, 3, StateLayout::for_team_size(3)).unwrap();
        let hb = (18.0f64.powi(2) + 16.0).sqrt();
        let bo = (12.0f64.powi(2) + 16.0).sqrt();
        // ∠hbo: from (h−b) = (−18,−4) to (o−b) = (12,−4)
        let hbo = ((-4.0f64).atan2(12.0) - (-4.0f64).atan2(-18.0) + 2.0 * PI) % (2.0 * PI);
        let hbo = if hbo > PI { hbo - 2.0 * PI } else { hbo };
        // slot 2 = observer (id 3): distance 3, facing the ball, below it
        // slot 3 = id 2: on the ball, zero vectors give zero angles
        let c14 = (11.0f64.powi(2) + 16.0).sqrt();
        let expect = [
            hb,
            bo,
            hbo / 2.0,
            3.0,
            0.0,
            -FRAC_PI_4,
            0.0,
            0.0,
            0.0,
            2.0,
            0.0,
            4.0,
            FRAC_PI_4,
            c14,
            ((-4.0f64).atan2(11.0)) / 2.0,
        ];
        assert_eq!(s.len(), expect.len());
        for (k, (a, b)) in s.iter().zip(expect).enumerate() {
            assert!((a - b).abs() < 1e-12, "var {k}: {a} vs {b}");
        }
    }

    #[test]
    fn missing_opponents_padded() {
        let cfg = SoccerConfig::default();
        let mut w = WorldState::kickoff(&cfg, 3).unwrap();
        w.opponents.truncate(1);
        let s = state_variables(&w, 2, StateLayout::for_team_size(3)).unwrap();
        assert_eq!(s[11..15], [cfg.diagonal(), 0.0, cfg.diagonal(), 0.0]);
    }

    #[test]
    fn unknown_agent_and_bad_layout() {
        let w = WorldState::kickoff(&SoccerConfig::default(), 3).unwrap();
        assert!(state_variables(&w, 9, StateLayout::for_team_size(3)).is_err());
        assert!(state_variables(&w, 2, StateLayout::for_team_size(4)).is_err());
    }

    proptest! {
        #[test]
        fn length_and_angle_range(
            team in 2usize..8,
            bx in -15.0f64..15.0, by in -10.0f64..10.0,
            seed_pos in prop::collection::vec((-15.0f64..15.0, -10.0f64..10.0, -4.0f64..4.0), 16),
            drop in 0usize..3,
        ) {
            let cfg = SoccerConfig::default();
            let mut w = WorldState::kickoff(&cfg, team).unwrap();
            w.ball = Vec2::new(bx, by);
            for (k, a) in w.teammates.iter_mut().chain(w.opponents.iter_mut()).enumerate() {
                let (x, y, h) = seed_pos[k % 16];
                a.pose = Pose2D::new(x, y, h);
            }
            let keep = w.opponents.len().saturating_sub(drop);
            w.opponents.truncate(keep);
            let layout = StateLayout::for_team_size(team);
            let s = state_variables(&w, 2, layout).unwrap();
            prop_assert_eq!(s.len(), layout.len());
            prop_assert_eq!(s.len(), 3 + 3 * (team - 1) + 2 * team);
            let ranges = layout.ranges(cfg.field_length, cfg.field_width);
            for (v, (lo, hi)) in s.iter().zip(ranges) {
                prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
            }
        }
    }
}
