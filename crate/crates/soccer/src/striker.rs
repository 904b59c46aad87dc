//! Striker cost and selection.

use crate::error::{SoccerError, SoccerResult};
use crate::geometry::{signed_angle, Vec2};
use crate::world::{SoccerConfig, WorldState, GOALIE_ID};

/// `distance + w_ang·|bearing| + w_crowd·(other agents within R_near of the ball)`.
///
/// The bearing is the angle between the agent's heading and the direction
/// to the ball; agents of both teams count toward the crowd term.
pub fn striker_cost(agent_id: u32, world: &WorldState, config: &SoccerConfig) -> SoccerResult<f64> {
    let agent = world.teammate(agent_id)?;
    let p = agent.position();
    let to_ball = world.ball - p;
    let bearing = signed_angle(Vec2::from_angle(agent.pose.heading), to_ball).abs();
    let crowd = world
        .teammates
        .iter()
        .filter(|a| a.id != agent_id)
        .chain(world.opponents.iter())
        .filter(|a| a.position().distance(world.ball) < config.striker_near_radius)
        .count();
    Ok(to_ball.norm() + config.striker_w_angle * bearing + config.striker_w_crowd * crowd as f64)
}

/// Lowest-cost field player; ties go to the lowest id.
pub fn assign_striker(world: &WorldState, config: &SoccerConfig) -> SoccerResult<u32> {
    let mut best: Option<(f64, u32)> = None;
    let mut ids: Vec<u32> = world.teammates.iter().map(|a| a.id).filter(|&id| id != GOALIE_ID).collect();
    ids.sort_unstable();
    for id in ids {
        let c = striker_cost(id, world, config)?;
        if best.is_none_or(|(bc, _)| c < bc) {
            best = Some((c, id));
        }
    }
    best.map(|(_, id)| id)
        .ok_or_else(|| SoccerError::Contract("no field player to act as striker".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2D;
    use crate::world::Agent;
    use std::f64::consts::PI;

    fn empty_world() -> WorldState {
        let cfg = SoccerConfig::default();
        let mut w = WorldState::kickoff(&cfg, 2).unwrap();
        w.opponents.clear();
        w.teammates.truncate(1);
        w
    }

    fn put(w: &mut WorldState, id: u32, x: f64, y: f64, heading: f64) {
        w.teammates.push(Agent { id, pose: Pose2D::new(x, y, heading) });
    }

    #[test]
    fn on_ball_facing_it_costs_zero() {
        let cfg = SoccerConfig::default();
        let mut w = empty_world();
        put(&mut w, 2, 0.0, 0.0, 0.3);
        assert_eq!(striker_cost(2, &w, &cfg).unwrap(), 0.0);
        assert_eq!(assign_striker(&w, &cfg).unwrap(), 2);
    }

    #[test]
    fn facing_the_ball_is_cheaper() {
        let cfg = SoccerConfig::default();
        let mut w = empty_world();
        put(&mut w, 2, -3.0, 0.0, PI);
        put(&mut w, 3, 3.0, 0.0, PI);
        assert!(striker_cost(3, &w, &cfg).unwrap() < striker_cost(2, &w, &cfg).unwrap());
        assert_eq!(assign_striker(&w, &cfg).unwrap(), 3);
    }

    #[test]
    fn hand_computed_cost() {
        let cfg = SoccerConfig::default();
        let mut w = empty_world();
        w.ball = Vec2::new(3.0, 4.0);
        put(&mut w, 2, 0.0, 0.0, 0.0);
        put(&mut w, 3, 3.0, 5.0, 0.0);
        w.opponents.push(Agent { id: 1, pose: Pose2D::new(3.5, 4.0, 0.0) });
        // distance 5, bearing atan2(4, 3), two others (agent 3 and the opponent) within 1.5 m
        let expect = 5.0 + 0.5 * 4.0f64.atan2(3.0) + 0.3 * 2.0;
        assert!((striker_cost(2, &w, &cfg).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let cfg = SoccerConfig::default();
        let mut w = empty_world();
        put(&mut w, 4, 0.0, 2.0, -PI / 2.0);
        put(&mut w, 3, 0.0, -2.0, PI / 2.0);
        assert_eq!(striker_cost(3, &w, &cfg).unwrap(), striker_cost(4, &w, &cfg).unwrap());
        assert_eq!(assign_striker(&w, &cfg).unwrap(), 3);
    }

    #[test]
    fn goalie_never_striker() {
        let cfg = SoccerConfig::default();
        let mut w = empty_world();
        w.ball = w.teammates[0].position();
        assert!(assign_striker(&w, &cfg).is_err());
        put(&mut w, 2, 10.0, 0.0, 0.0);
        assert_eq!(assign_striker(&w, &cfg).unwrap(), 2);
    }
}
