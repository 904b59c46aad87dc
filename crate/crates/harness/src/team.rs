//! The home team's learners: one per field player, or one shared.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;

use gvf_core::policy::{epsilon_greedy_sample, perturbed_gibbs_sample};
use gvf_core::{
    ActionSet, Algorithm, AnswerFunctions, Checkpoint, ExperienceRecord, GreedyGq, OffPac, QuestionFunctions,
    TargetPolicy, TileCoder, UpdateDiagnostics,
};
use gvf_soccer::NUM_ACTIONS;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, HarnessResult};

#[derive(Clone, Debug, PartialEq)]
pub enum AgentLearner {
    GreedyGq(GreedyGq),
    OffPac(OffPac),
}

impl AgentLearner {
    fn episode_init(&mut self) {
        match self {
            AgentLearner::GreedyGq(l) => l.episode_init(),
            AgentLearner::OffPac(l) => l.episode_init(),
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        match self {
            AgentLearner::GreedyGq(l) => l.to_checkpoint(),
            AgentLearner::OffPac(l) => l.to_checkpoint(),
        }
    }

    /// ‖θ‖ for Greedy-GQ, ‖u‖ for Off-PAC.
    pub fn policy_norm(&self) -> f64 {
        match self {
            AgentLearner::GreedyGq(l) => l.theta.norm(),
            AgentLearner::OffPac(l) => l.actor.u.norm(),
        }
    }
}

/// Field-player ids of a team of `team_size`.
pub fn field_players(team_size: usize) -> Vec<u32> {
    (2..=team_size as u32).collect()
}

pub struct Team {
    algorithm: Algorithm,
    learners: Vec<AgentLearner>,
    /// Agent id → index into `learners`.
    slots: BTreeMap<u32, usize>,
    last_episode: BTreeMap<u32, u64>,
    question: QuestionFunctions,
    answer: AnswerFunctions,
    coder: TileCoder,
    actions: ActionSet,
    gamma: f64,
    epsilon: f64,
    perturbation: f64,
    beta: f64,
}

impl Team {
    /// Fresh zero-initialized learners.
    pub fn new(config: &ExperimentConfig) -> HarnessResult<Self> {
        let algorithm = config.algorithm()?;
        let dim = config.tiles.memory_size;
        let count = if config.experiment.shared_weights { 1 } else { config.experiment.team_size - 1 };
        let learners = (0..count)
            .map(|_| -> HarnessResult<AgentLearner> {
                Ok(match algorithm {
                    Algorithm::GreedyGq => AgentLearner::GreedyGq(GreedyGq::new(dim, config.greedy_gq_params())?),
                    Algorithm::OffPac => AgentLearner::OffPac(OffPac::new(dim, dim, config.offpac_params())?),
                })
            })
            .collect::<HarnessResult<Vec<_>>>()?;
        Self::with_learners(config, learners)
    }

    fn with_learners(config: &ExperimentConfig, learners: Vec<AgentLearner>) -> HarnessResult<Self> {
        let algorithm = config.algorithm()?;
        let shared = config.experiment.shared_weights;
        let slots = field_players(config.experiment.team_size)
            .into_iter()
            .enumerate()
            .map(|(k, id)| (id, if shared { 0 } else { k }))
            .collect();
        let gamma = match algorithm {
            Algorithm::GreedyGq => config.greedy_gq.gamma,
            Algorithm::OffPac => config.offpac.gamma,
        };
        let (question, answer) = match algorithm {
            Algorithm::GreedyGq => (
                QuestionFunctions::constant(TargetPolicy::Greedy, gamma),
                AnswerFunctions::constant(config.greedy_gq.lambda),
            ),
            Algorithm::OffPac => (
                QuestionFunctions::constant(TargetPolicy::Gibbs, gamma),
                AnswerFunctions::constant(config.offpac.lambda_critic).with_actor_lambda(config.offpac.lambda_actor),
            ),
        };
        Ok(Self {
            algorithm,
            learners,
            slots,
            last_episode: BTreeMap::new(),
            question,
            answer,
            coder: TileCoder::new(config.tile_config())?,
            actions: ActionSet::range(NUM_ACTIONS)?,
            gamma,
            epsilon: config.greedy_gq.epsilon,
            perturbation: config.offpac.perturbation,
            beta: config.offpac.beta,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    /// Discount of the question being learned.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn learners(&self) -> &[AgentLearner] {
        &self.learners
    }

    /// Learner of a field player.
    pub fn learner(&self, agent: u32) -> HarnessResult<&AgentLearner> {
        let k = self.slot(agent)?;
        Ok(&self.learners[k])
    }

    fn slot(&self, agent: u32) -> HarnessResult<usize> {
        self.slots
            .get(&agent)
            .copied()
            .ok_or_else(|| HarnessError::Config(format!("agent {agent} has no learner")))
    }

    /// Picks an action index for `agent` in `state`.
    ///
    /// With `explore`, Greedy-GQ acts ε-greedily and Off-PAC samples the
    /// perturbed Gibbs policy; otherwise Greedy-GQ is greedy (lowest index
    /// on ties) and Off-PAC samples the plain Gibbs policy. Returns the
    /// action and its probability under the policy that drew it.
    pub fn choose<R: Rng + ?Sized>(
        &self,
        agent: u32,
        state: &[f64],
        explore: bool,
        rng: &mut R,
    ) -> HarnessResult<(usize, f64)> {
        let learner = &self.learners[self.slot(agent)?];
        Ok(match learner {
            AgentLearner::GreedyGq(l) => {
                if explore {
                    epsilon_greedy_sample(&l.theta, &self.coder, state, &self.actions, self.epsilon, rng)?
                } else {
                    (l.greedy_action(&self.coder, state, &self.actions)?, 1.0)
                }
            }
            AgentLearner::OffPac(l) => {
                let p = if explore { self.perturbation } else { 0.0 };
                perturbed_gibbs_sample(&l.actor.u, &self.coder, state, &self.actions, p, self.beta, rng)?
            }
        })
    }

    /// Applies one logged transition. A change of the record's episode
    /// number for its agent clears the learner's traces first.
    ///
    /// Online training and offline replay both go through here, so equal
    /// record streams give equal weights.
    pub fn apply(&mut self, record: &ExperienceRecord) -> HarnessResult<UpdateDiagnostics> {
        let k = self.slot(record.agent)?;
        if self.last_episode.get(&record.agent) != Some(&record.episode) {
            self.learners[k].episode_init();
            self.last_episode.insert(record.agent, record.episode);
        }
        let diag = match &mut self.learners[k] {
            AgentLearner::GreedyGq(l) => l.update(&record.sample, &self.question, &self.answer, &self.coder, &self.actions)?,
            AgentLearner::OffPac(l) => l.update(
                &record.sample,
                &self.question,
                &self.answer,
                &self.coder,
                &self.coder,
                &self.actions,
            )?,
        };
        Ok(diag)
    }

    /// Mean policy-weight norm over learners.
    pub fn mean_policy_norm(&self) -> f64 {
        self.learners.iter().map(AgentLearner::policy_norm).sum::<f64>() / self.learners.len() as f64
    }

    /// Checkpoint file of each learner: `agent_<id>.ckpt`, or `shared.ckpt`.
    pub fn checkpoint_paths(config: &ExperimentConfig, dir: &Path) -> Vec<PathBuf> {
        if config.experiment.shared_weights {
            vec![dir.join("shared.ckpt")]
        } else {
            field_players(config.experiment.team_size)
                .into_iter()
                .map(|id| dir.join(format!("agent_{id}.ckpt")))
                .collect()
        }
    }

    pub fn save(&self, config: &ExperimentConfig, dir: &Path) -> HarnessResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (learner, path) in self.learners.iter().zip(Self::checkpoint_paths(config, dir)) {
            learner.to_checkpoint().save(&path)?;
        }
        Ok(())
    }

    pub fn load(config: &ExperimentConfig, dir: &Path) -> HarnessResult<Self> {
        let algorithm = config.algorithm()?;
        let learners = Self::checkpoint_paths(config, dir)
            .iter()
            .map(|path| -> HarnessResult<AgentLearner> {
                let ckpt = Checkpoint::load(path)?;
                ckpt.expect_algorithm(algorithm)?;
                Ok(match algorithm {
                    Algorithm::GreedyGq => AgentLearner::GreedyGq(GreedyGq::from_checkpoint(&ckpt)?),
                    Algorithm::OffPac => AgentLearner::OffPac(OffPac::from_checkpoint(&ckpt)?),
                })
            })
            .collect::<HarnessResult<Vec<_>>>()?;
        for l in &learners {
            let dim = match l {
                AgentLearner::GreedyGq(g) => g.dimension(),
                AgentLearner::OffPac(o) => o.actor.u.dimension(),
            };
            if dim != config.tiles.memory_size {
                return Err(HarnessError::Config(format!(
                    "checkpoint dimension {dim} does not match tiles.memory_size {}",
                    config.tiles.memory_size
                )));
            }
        }
        Self::with_learners(config, learners)
    }
}
