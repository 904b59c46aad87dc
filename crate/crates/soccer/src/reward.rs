//! Per-agent rewards.

use crate::error::{SoccerError, SoccerResult};
use crate::world::{SoccerConfig, Side, WorldState};

/// Whether `agent_id` stands within the crowd radius of another teammate.
pub fn crowded(world: &WorldState, agent_id: u32, config: &SoccerConfig) -> SoccerResult<bool> {
    let me = world.teammate(agent_id)?.position();
    Ok(world
        .teammates
        .iter()
        .any(|a| a.id != agent_id && a.position().distance(me) < config.crowd_radius))
}

/// Parts of one decision interval's transient reward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardParts {
    /// Net ball x-displacement over the interval.
    pub progress: f64,
    pub step_penalty: f64,
    pub crowd_penalty: f64,
}

impl RewardParts {
    pub fn total(&self) -> f64 {
        self.progress - self.step_penalty - self.crowd_penalty
    }
}

/// `Δx(ball) − step_penalty − crowd_penalty·[crowded in next]` for one
/// decision interval from `prev` to `next`.
pub fn reward_transient(
    prev: &WorldState,
    next: &WorldState,
    agent_id: u32,
    config: &SoccerConfig,
) -> SoccerResult<RewardParts> {
    let crowd = if crowded(next, agent_id, config)? { config.crowd_penalty } else { 0.0 };
    Ok(RewardParts {
        progress: next.ball.x - prev.ball.x,
        step_penalty: config.step_penalty,
        crowd_penalty: crowd,
    })
}

/// `+goal_reward` for a home goal, `−goal_reward` for an away goal.
pub fn reward_terminal(goal: Option<Side>, config: &SoccerConfig) -> SoccerResult<f64> {
    match goal {
        Some(Side::Home) => Ok(config.goal_reward),
        Some(Side::Away) => Ok(-config.goal_reward),
        None => Err(SoccerError::Contract("terminal reward requested without a goal".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose2D, Vec2};

    fn spread_world() -> WorldState {
        let cfg = SoccerConfig::default();
        let mut w = WorldState::kickoff(&cfg, 3).unwrap();
        w.teammates[1].pose = Pose2D::new(-5.0, 5.0, 0.0);
        w.teammates[2].pose = Pose2D::new(-5.0, -5.0, 0.0);
        w
    }

    #[test]
    fn progress_minus_step_penalty() {
        let cfg = SoccerConfig::default();
        let prev = spread_world();
        let mut next = prev.clone();
        next.ball = Vec2::new(0.5, 0.0);
        let r = reward_transient(&prev, &next, 2, &cfg).unwrap();
        assert!((r.total() - 0.49).abs() < 1e-12);
        let still = reward_transient(&prev, &prev, 2, &cfg).unwrap();
        assert!((still.total() + 0.01).abs() < 1e-15);
    }

    #[test]
    fn crowding_costs_both_agents() {
        let cfg = SoccerConfig::default();
        let prev = spread_world();
        let mut next = prev.clone();
        next.teammates[1].pose = Pose2D::new(0.0, 0.0, 0.0);
        next.teammates[2].pose = Pose2D::new(1.0, 0.0, 0.0);
        for id in [2, 3] {
            let r = reward_transient(&prev, &next, id, &cfg).unwrap();
            assert_eq!(r.crowd_penalty, 5.0);
            assert!((r.total() + 5.01).abs() < 1e-12);
        }
    }

    #[test]
    fn terminal_rewards() {
        let cfg = SoccerConfig::default();
        assert_eq!(reward_terminal(Some(Side::Home), &cfg).unwrap(), 100.0);
        assert_eq!(reward_terminal(Some(Side::Away), &cfg).unwrap(), -100.0);
        assert!(reward_terminal(None, &cfg).is_err());
    }
}
