//! Scripted role policies for opponents and baselines.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::SoccerResult;
use crate::roles::{target_position, Role, ACTION_ROLES};
use crate::world::{SoccerConfig, WorldState, GOALIE_ID};

pub type SimRng = ChaCha8Rng;

/// Fill order of the hand-coded assignment.
pub const ROLE_PRIORITY: [Role; 12] = [
    Role::ST,
    Role::BM,
    Role::FL,
    Role::FR,
    Role::WM,
    Role::BL,
    Role::BR,
    Role::EX1M,
    Role::WL,
    Role::WR,
    Role::EX1L,
    Role::EX1R,
];

/// Picks reactive roles for a team's field players other than the striker.
///
/// `view` is the team's own perspective: its agents are `view.teammates`
/// and it attacks toward `+x`.
pub trait RolePolicy {
    fn choose(
        &mut self,
        view: &WorldState,
        striker: u32,
        config: &SoccerConfig,
        rng: &mut SimRng,
    ) -> SoccerResult<BTreeMap<u32, Role>>;

    fn name(&self) -> &'static str;
}

fn field_players(view: &WorldState, striker: u32) -> Vec<u32> {
    let mut ids: Vec<u32> = view
        .teammates
        .iter()
        .map(|a| a.id)
        .filter(|&id| id != GOALIE_ID && id != striker)
        .collect();
    ids.sort_unstable();
    ids
}

/// Greedy matching: roles in priority order each take the nearest free
/// agent to their target (ties by lowest id).
pub fn hand_coded_roles(view: &WorldState, striker: u32, config: &SoccerConfig) -> SoccerResult<BTreeMap<u32, Role>> {
    let mut free = field_players(view, striker);
    let mut out = BTreeMap::new();
    for role in ROLE_PRIORITY.iter().cycle().take(free.len().max(1) * ROLE_PRIORITY.len()) {
        if free.is_empty() {
            break;
        }
        let mut best: Option<(f64, usize)> = None;
        for (k, &id) in free.iter().enumerate() {
            let target = target_position(*role, view, id, config)?;
            let d = view.teammate(id)?.position().distance(target);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, k));
            }
        }
        if let Some((_, k)) = best {
            out.insert(free.remove(k), *role);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HandCodedPolicy;

impl RolePolicy for HandCodedPolicy {
    fn choose(&mut self, view: &WorldState, striker: u32, config: &SoccerConfig, _rng: &mut SimRng) -> SoccerResult<BTreeMap<u32, Role>> {
        hand_coded_roles(view, striker, config)
    }

    fn name(&self) -> &'static str {
        "hand_coded"
    }
}

/// Uniformly random reactive role per agent and decision.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomPolicy;

impl RolePolicy for RandomPolicy {
    fn choose(&mut self, view: &WorldState, striker: u32, _config: &SoccerConfig, rng: &mut SimRng) -> SoccerResult<BTreeMap<u32, Role>> {
        Ok(field_players(view, striker)
            .into_iter()
            .map(|id| (id, ACTION_ROLES[rng.random_range(0..ACTION_ROLES.len())]))
            .collect())
    }

    fn name(&self) -> &'static str {
        "random"
    }
}

/// Fixed formation: the k-th field player by id always holds `ROLE_PRIORITY[k]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct StaticPolicy;

impl RolePolicy for StaticPolicy {
    fn choose(&mut self, view: &WorldState, striker: u32, _config: &SoccerConfig, _rng: &mut SimRng) -> SoccerResult<BTreeMap<u32, Role>> {
        let mut ids: Vec<u32> = view.teammates.iter().map(|a| a.id).filter(|&id| id != GOALIE_ID).collect();
        ids.sort_unstable();
        Ok(ids
            .into_iter()
            .enumerate()
            .filter(|&(_, id)| id != striker)
            .map(|(k, id)| (id, ROLE_PRIORITY[k % ROLE_PRIORITY.len()]))
            .collect())
    }

    fn name(&self) -> &'static str {
        "mirror"
    }
}

/// Builds the policy named in configuration files.
pub fn policy_by_name(name: &str) -> Option<Box<dyn RolePolicy>> {
    match name {
        "hand_coded" => Some(Box::new(HandCodedPolicy)),
        "random" => Some(Box::new(RandomPolicy)),
        "mirror" => Some(Box::new(StaticPolicy)),
        _ => None,
    }
}
