//! Tick and decision-interval dynamics.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rand::Rng;

use crate::error::{SoccerError, SoccerResult};
use crate::events::{EventKind, EventRecord};
use crate::geometry::{closest_on_segment, wrap_angle, Vec2};
use crate::policy::{RolePolicy, SimRng};
use crate::reward::{crowded, reward_terminal, RewardParts};
use crate::roles::{target_position, Role, RoleAssignment};
use crate::striker::assign_striker;
use crate::world::{snap, Side, SoccerConfig, WorldState, GOALIE_ID};

/// What happened during one tick.
#[derive(Clone, Debug, PartialEq)]
pub struct TickEvents {
    pub goal: Option<Side>,
    /// Ball position at the start of the tick.
    pub ball_before: Vec2,
    /// Ball position at the end of the tick, before any kickoff reset.
    pub ball_after: Vec2,
    /// Agent that played the ball this tick.
    pub touch: Option<(Side, u32)>,
    /// World at the moment of a goal, before the kickoff reset.
    pub pre_reset: Option<WorldState>,
}

/// Moves a point from a team's own view into home coordinates.
fn to_world(side: Side, p: Vec2) -> Vec2 {
    match side {
        Side::Home => p,
        Side::Away => p * -1.0,
    }
}

/// Completes chosen reactive roles into a full assignment for the team
/// seen as `view.teammates`: the current striker gets SK, the goalie GK or
/// GKSK, and any uncovered field player falls back to ST.
pub fn complete_assignment(
    view: &WorldState,
    chosen: &BTreeMap<u32, Role>,
    config: &SoccerConfig,
) -> SoccerResult<RoleAssignment> {
    let striker = assign_striker(view, config)?;
    let mut out = BTreeMap::new();
    for a in &view.teammates {
        let role = if a.id == GOALIE_ID {
            if a.position().distance(view.ball) <= config.goalie_reach {
                Role::GKSK
            } else {
                Role::GK
            }
        } else if a.id == striker {
            Role::SK
        } else {
            match chosen.get(&a.id) {
                Some(&r) if !r.is_active() && !r.is_goalie_role() => r,
                Some(&r) => return Err(SoccerError::Contract(format!("role {r} cannot be chosen"))),
                None => Role::ST,
            }
        };
        out.insert(a.id, role);
    }
    Ok(RoleAssignment(out))
}

fn move_team(
    world: &WorldState,
    next: &mut WorldState,
    side: Side,
    assignment: &RoleAssignment,
    config: &SoccerConfig,
) -> SoccerResult<()> {
    let view = match side {
        Side::Home => world.clone(),
        Side::Away => world.mirrored(),
    };
    assignment.validate(&view.teammates)?;
    let max_step = config.v_max * config.tick_seconds;
    let mut moved = Vec::with_capacity(view.teammates.len());
    for agent in &view.teammates {
        let role = assignment.get(agent.id).expect("validated");
        let target = if role.is_active() {
            view.ball
        } else {
            target_position(role, &view, agent.id, config)?
        };
        let p = config.clamp(agent.position().step_toward(target, max_step), 0.0);
        let to_ball = view.ball - p;
        let heading = if to_ball.norm() > 0.0 { to_ball.angle() } else { agent.pose.heading };
        moved.push((agent.id, p, heading));
    }
    let team = next.team_mut(side);
    for (id, p, heading) in moved {
        let a = team.iter_mut().find(|a| a.id == id).expect("same team");
        a.pose.set_position(to_world(side, p));
        a.pose.heading = match side {
            Side::Home => wrap_angle(heading),
            Side::Away => wrap_angle(heading + PI),
        };
    }
    Ok(())
}

/// Advances the world by one tick.
///
/// Agents first move toward their role targets (strikers toward the ball).
/// Any non-GK agent within control radius may then play the ball. A team
/// in possession keeps it unless a challenger tackles (`p_tackle`); a loose
/// ball goes to one of the sides present with equal chance, however many
/// of its players crowd it. Inside shot range the player shoots at the
/// goal with uniform aim error, otherwise it dribbles forward with
/// probability `p_dribble` (`p_dribble_crowded` when a teammate is within
/// `crowd_radius`) or loses the ball to a uniform scatter. A goalie in
/// GKSK clears upfield. Moving balls roll with friction and may be stopped
/// by a defender anywhere along the tick's path. Goals are detected where
/// the path crosses a goal line between the posts; after a goal the world
/// is reset to kickoff.
pub fn step(
    world: &WorldState,
    home: &RoleAssignment,
    away: &RoleAssignment,
    rng: &mut SimRng,
    config: &SoccerConfig,
) -> SoccerResult<(WorldState, TickEvents)> {
    let mut next = world.clone();
    next.tick += 1;
    move_team(world, &mut next, Side::Home, home, config)?;
    move_team(world, &mut next, Side::Away, away, config)?;

    let ball_before = world.ball;
    let mut ball = world.ball;
    let mut velocity = world.ball_velocity;

    // ball control by strikers and sweeping goalies
    let mut contenders = Vec::new();
    for (side, assignment) in [(Side::Home, home), (Side::Away, away)] {
        for a in next.team(side) {
            let role = assignment.get(a.id).expect("validated");
            if role != Role::GK && a.position().distance(ball) <= config.control_radius {
                contenders.push((side, a.id, role));
            }
        }
    }
    let mut touch = None;
    let mut possession = world.possession;
    if !contenders.is_empty() {
        let holder: Vec<usize> = (0..contenders.len()).filter(|&k| Some(contenders[k].0) == possession).collect();
        let challengers: Vec<usize> = (0..contenders.len()).filter(|&k| Some(contenders[k].0) != possession).collect();
        let pool: Vec<usize> = if holder.is_empty() || challengers.is_empty() {
            // loose ball: each side present contends once, however many teammates crowd it
            let home: Vec<usize> = (0..contenders.len()).filter(|&k| contenders[k].0 == Side::Home).collect();
            let away: Vec<usize> = (0..contenders.len()).filter(|&k| contenders[k].0 == Side::Away).collect();
            if home.is_empty() || (!away.is_empty() && rng.random::<f64>() < 0.5) {
                away
            } else {
                home
            }
        } else if rng.random::<f64>() < config.p_tackle {
            challengers
        } else {
            holder
        };
        let k = if pool.len() > 1 { pool[rng.random_range(0..pool.len())] } else { pool[0] };
        let (side, id, role) = contenders[k];
        let me = next.team(side).iter().find(|a| a.id == id).expect("contender").position();
        let crowded = next.team(side).iter().any(|a| a.id != id && a.position().distance(me) < config.crowd_radius);
        let p_dribble = if crowded { config.p_dribble_crowded } else { config.p_dribble };
        touch = Some((side, id));
        possession = None;
        let b = to_world(side, ball); // own view (the map is its own inverse)
        let goal = Vec2::new(config.field_length / 2.0, 0.0);
        let (new_b, new_v) = if role == Role::GKSK {
            let angle = rng.random_range(-0.6..0.6);
            (b, Vec2::from_angle(angle) * config.clear_speed)
        } else if b.distance(goal) <= config.shot_range {
            let aim = goal + Vec2::new(0.0, rng.random_range(-config.shot_jitter..=config.shot_jitter));
            (b, (aim - b).unit() * config.shot_speed)
        } else if rng.random::<f64>() < p_dribble {
            possession = Some(side);
            (b + (goal - b).unit() * config.dribble_push, Vec2::ZERO)
        } else {
            let theta = rng.random_range(-PI..PI);
            let r = rng.random_range(0.0..=config.scatter);
            (b + Vec2::from_angle(theta) * r, Vec2::ZERO)
        };
        ball = to_world(side, new_b);
        velocity = to_world(side, new_v);
    }

    // rolling: defenders anywhere along this tick's path may block it
    if velocity.norm() > 0.0 {
        let start = ball;
        let end = ball + velocity * config.tick_seconds;
        let kicker = touch.map(|(s, _)| s);
        let mut blockers: Vec<(f64, Vec2)> = Vec::new();
        for side in [Side::Home, Side::Away] {
            if Some(side) == kicker {
                continue;
            }
            for a in next.team(side) {
                let (t, q) = closest_on_segment(a.position(), start, end);
                if a.position().distance(q) <= config.control_radius {
                    blockers.push((t, q));
                }
            }
        }
        blockers.sort_by(|x, y| x.0.total_cmp(&y.0));
        ball = end;
        velocity = velocity * config.ball_friction;
        for (_, q) in blockers {
            if rng.random::<f64>() < config.p_block {
                ball = q;
                velocity = Vec2::ZERO;
                break;
            }
        }
        if velocity.norm() < 0.1 {
            velocity = Vec2::ZERO;
        }
    }
    ball = Vec2::new(snap(ball.x), snap(ball.y));

    // goal lines and boundaries
    let hx = config.field_length / 2.0;
    let hy = config.field_width / 2.0;
    let mut goal = None;
    for (line, side) in [(hx, Side::Home), (-hx, Side::Away)] {
        let crossed = if line > 0.0 { ball.x > line } else { ball.x < line };
        if crossed {
            let t = (line - ball_before.x) / (ball.x - ball_before.x);
            let y_cross = ball_before.y + t * (ball.y - ball_before.y);
            if y_cross.abs() <= config.goal_half_width {
                goal = Some(side);
            } else {
                ball.x = line;
                velocity = Vec2::ZERO;
            }
        }
    }
    if goal.is_none() && ball.y.abs() > hy {
        ball.y = ball.y.clamp(-hy, hy);
        velocity = Vec2::ZERO;
    }

    next.ball = ball;
    next.ball_velocity = velocity;
    next.possession = if velocity.norm() > 0.0 { None } else { possession };
    let mut events = TickEvents {
        goal,
        ball_before,
        ball_after: ball,
        touch,
        pre_reset: None,
    };
    if let Some(side) = goal {
        events.pre_reset = Some(next.clone());
        match side {
            Side::Home => next.score.0 += 1,
            Side::Away => next.score.1 += 1,
        }
        next.reset_kickoff(config);
    }
    Ok((next, events))
}

/// Per-agent outcome of one decision interval.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentOutcome {
    pub reward: RewardParts,
    /// Transient reward `r`.
    pub r: f64,
    /// Terminal reward `z`.
    pub z: f64,
    pub gamma_next: f64,
    /// Whether the agent was striker when the interval began.
    pub striker_at_start: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionOutcome {
    /// World after the interval, reset to kickoff if a goal ended it.
    pub world: WorldState,
    /// World at the end of play, before any kickoff reset.
    pub end_of_play: WorldState,
    pub goal: Option<Side>,
    pub ticks: u64,
    pub striker_at_start: u32,
    /// Home field players that took over as striker during the interval,
    /// including one that holds the role when the next interval begins.
    pub became_striker: BTreeSet<u32>,
    /// Net ball x-displacement over the interval, up to the goal crossing.
    pub progress: f64,
    /// Keyed by home field-player id.
    pub agents: BTreeMap<u32, AgentOutcome>,
    pub events: Vec<EventRecord>,
}

/// Runs up to `ticks_per_decision` ticks (stopping early on a goal or at
/// `tick_limit`) with the home team's chosen reactive roles and the away
/// team's scripted policy, and returns every home field player's
/// `(r, z, γ')`.
///
/// `r = Δx − step_penalty − crowd_penalty·[crowded at the end]`. A goal
/// gives `γ' = 0, z = ±goal_reward` to everyone; otherwise an agent that
/// became striker during the interval gets `γ' = 0, z = 0` and the rest
/// get `γ' = gamma`.
#[allow(clippy::too_many_arguments)]
pub fn decision_step(
    world: &WorldState,
    home_roles: &BTreeMap<u32, Role>,
    away_policy: &mut dyn RolePolicy,
    gamma: f64,
    tick_limit: u64,
    rng: &mut SimRng,
    config: &SoccerConfig,
) -> SoccerResult<DecisionOutcome> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(SoccerError::Contract(format!("gamma {gamma} outside [0, 1]")));
    }
    let mut events = Vec::new();
    let striker_at_start = assign_striker(world, config)?;
    let away_view = world.mirrored();
    let away_striker = assign_striker(&away_view, config)?;
    let away_roles = away_policy.choose(&away_view, away_striker, config, rng)?;

    let first = complete_assignment(world, home_roles, config)?;
    let first_away = complete_assignment(&away_view, &away_roles, config)?;
    events.push(EventRecord::new(
        world.tick,
        EventKind::Roles,
        format!("home={};away={}", first.to_payload().replace(';', " "), first_away.to_payload().replace(';', " ")),
    ));

    let mut current = world.clone();
    let mut end_of_play = world.clone();
    let mut progress = 0.0;
    let mut goal = None;
    let mut ticks = 0;
    let mut became_striker = BTreeSet::new();
    let mut strikers = (striker_at_start, away_striker);
    while ticks < config.ticks_per_decision && current.tick < tick_limit {
        let home = complete_assignment(&current, home_roles, config)?;
        let view = current.mirrored();
        let away = complete_assignment(&view, &away_roles, config)?;
        let (hs, as_) = (home.striker().expect("one striker"), away.striker().expect("one striker"));
        if hs != strikers.0 {
            events.push(EventRecord::new(current.tick, EventKind::Striker, format!("side=home;id={hs}")));
        }
        if as_ != strikers.1 {
            events.push(EventRecord::new(current.tick, EventKind::Striker, format!("side=away;id={as_}")));
        }
        strikers = (hs, as_);
        if hs != striker_at_start {
            became_striker.insert(hs);
        }

        let (next, ev) = step(&current, &home, &away, rng, config)?;
        progress += ev.ball_after.x - ev.ball_before.x;
        ticks += 1;
        end_of_play = ev.pre_reset.clone().unwrap_or_else(|| next.clone());
        if let Some(side) = ev.goal {
            goal = Some(side);
            events.push(EventRecord::new(
                next.tick,
                EventKind::Goal,
                format!("side={};home={};away={}", side.as_str(), next.score.0, next.score.1),
            ));
            current = next;
            break;
        }
        current = next;
    }

    if goal.is_none() {
        let boundary = assign_striker(&current, config)?;
        if boundary != striker_at_start {
            became_striker.insert(boundary);
        }
    }

    let z = match goal {
        Some(_) => reward_terminal(goal, config)?,
        None => 0.0,
    };
    let mut agents = BTreeMap::new();
    for a in world.teammates.iter().filter(|a| a.id != GOALIE_ID) {
        let crowd = if crowded(&end_of_play, a.id, config)? { config.crowd_penalty } else { 0.0 };
        let reward = RewardParts {
            progress,
            step_penalty: config.step_penalty,
            crowd_penalty: crowd,
        };
        let gamma_next = if goal.is_some() || became_striker.contains(&a.id) { 0.0 } else { gamma };
        agents.insert(
            a.id,
            AgentOutcome {
                reward,
                r: reward.total(),
                z,
                gamma_next,
                striker_at_start: a.id == striker_at_start,
            },
        );
    }
    events.push(EventRecord::new(
        current.tick,
        EventKind::Decision,
        format!("ticks={ticks};dx={progress:.16e};ball_x={:.16e}", end_of_play.ball.x),
    ));
    Ok(DecisionOutcome {
        world: current,
        end_of_play,
        goal,
        ticks,
        striker_at_start,
        became_striker,
        progress,
        agents,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2D;
    use rand::SeedableRng;

    fn spread() -> WorldState {
        let cfg = SoccerConfig::default();
        let mut w = WorldState::kickoff(&cfg, 3).unwrap();
        w.teammates[0].pose = Pose2D::new(-14.0, 0.0, 0.0);
        w.teammates[1].pose = Pose2D::new(-5.0, 0.0, 0.0);
        w.teammates[2].pose = Pose2D::new(-10.0, 8.0, 0.0);
        for (k, a) in w.opponents.iter_mut().enumerate() {
            a.pose = Pose2D::new(14.0, -8.0 + k as f64, 0.0);
        }
        w
    }

    fn assignments(w: &WorldState, cfg: &SoccerConfig) -> (RoleAssignment, RoleAssignment) {
        let h = complete_assignment(w, &BTreeMap::new(), cfg).unwrap();
        let a = complete_assignment(&w.mirrored(), &BTreeMap::new(), cfg).unwrap();
        (h, a)
    }

    #[test]
    fn completion_fills_striker_goalie_and_fallback() {
        let cfg = SoccerConfig::default();
        let mut w = spread();
        w.ball = Vec2::new(-4.0, 0.0);
        let a = complete_assignment(&w, &BTreeMap::new(), &cfg).unwrap();
        assert_eq!(a.get(1), Some(Role::GK));
        assert_eq!(a.get(2), Some(Role::SK));
        assert_eq!(a.get(3), Some(Role::ST));
        w.ball = Vec2::new(-13.0, 0.5);
        let a = complete_assignment(&w, &BTreeMap::new(), &cfg).unwrap();
        assert_eq!(a.get(1), Some(Role::GKSK));
    }

    #[test]
    fn striker_and_goalie_roles_cannot_be_chosen() {
        let cfg = SoccerConfig::default();
        let w = spread();
        for r in [Role::SK, Role::GK, Role::GKSK] {
            let chosen: BTreeMap<u32, Role> = [(3, r)].into();
            assert!(complete_assignment(&w, &chosen, &cfg).is_err());
        }
    }

    #[test]
    fn defender_on_the_path_blocks_a_fast_ball() {
        let cfg = SoccerConfig { p_block: 1.0, ..SoccerConfig::default() };
        let mut w = spread();
        // ball skips 2 m per tick; the defender sits between samples
        w.ball = Vec2::new(2.0, 0.0);
        w.ball_velocity = Vec2::new(8.0, 0.0);
        w.opponents[1].pose = Pose2D::new(3.0, 0.2, 0.0);
        let (h, a) = assignments(&w, &cfg);
        let (next, ev) = step(&w, &h, &a, &mut SimRng::seed_from_u64(0), &cfg).unwrap();
        assert_eq!(next.ball_velocity, Vec2::ZERO);
        assert!(next.ball.x < 4.0, "{:?}", next.ball);
        assert_eq!(ev.goal, None);
    }

    #[test]
    fn ball_past_the_post_stops_on_the_line() {
        let cfg = SoccerConfig::default();
        let mut w = spread();
        w.ball = Vec2::new(14.5, 4.0);
        w.ball_velocity = Vec2::new(8.0, 0.0);
        let (h, a) = assignments(&w, &cfg);
        let (next, ev) = step(&w, &h, &a, &mut SimRng::seed_from_u64(0), &cfg).unwrap();
        assert_eq!(ev.goal, None);
        assert_eq!(next.ball.x, cfg.field_length / 2.0);
        assert_eq!(next.ball_velocity, Vec2::ZERO);
    }

    #[test]
    fn crowded_dribbler_uses_the_crowded_probability() {
        let cfg = SoccerConfig { p_dribble: 1.0, p_dribble_crowded: 0.0, ..SoccerConfig::default() };
        let mut w = spread();
        w.ball = Vec2::new(0.0, 0.0);
        w.teammates[1].pose = Pose2D::new(-0.1, 0.0, 0.0);
        let (h, a) = assignments(&w, &cfg);
        let (free, _) = step(&w, &h, &a, &mut SimRng::seed_from_u64(1), &cfg).unwrap();
        assert_eq!(free.possession, Some(Side::Home));
        w.teammates[2].pose = Pose2D::new(-0.1, 1.0, 0.0);
        let (h, a) = assignments(&w, &cfg);
        let (crowded, ev) = step(&w, &h, &a, &mut SimRng::seed_from_u64(1), &cfg).unwrap();
        assert!(ev.touch.is_some());
        assert_eq!(crowded.possession, None);
    }

    #[test]
    fn decision_rejects_bad_gamma() {
        let cfg = SoccerConfig::default();
        let w = spread();
        let mut rng = SimRng::seed_from_u64(0);
        let err = decision_step(&w, &BTreeMap::new(), &mut crate::policy::RandomPolicy, 1.5, 100, &mut rng, &cfg);
        assert!(err.is_err());
    }
}
