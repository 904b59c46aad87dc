//! Training runs, frozen evaluation and offline replay.
//!
//! Output layout of a run directory:
//!
//! ```text
//! metrics.csv                 all trials, one row per bin
//! trial_<k>/experience.log    learned runs: every logged transition
//! trial_<k>/events.log        goals, striker changes, role assignments
//! trial_<k>/agent_<id>.ckpt   learned runs: final weights (shared.ckpt when shared)
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;

use gvf_core::gvf::{read_experience, EXPERIENCE_HEADER};
use gvf_core::{ExperienceRecord, GvfSample};
use gvf_soccer::{
    assign_striker, decision_step, policy_by_name, state_variables, EventKind, EventRecord, Role, RolePolicy, SimRng,
    WorldState, ACTION_ROLES, EVENT_HEADER,
};

use crate::config::{splitmix, ExperimentConfig};
use crate::error::{HarnessError, HarnessResult};
use crate::metrics::{BinAccumulator, RunMetrics};
use crate::team::{field_players, Team};

/// Who picks the home team's reactive roles in a game.
pub enum Home<'a> {
    /// Learners choose; `learn` turns on exploration and updates.
    Learned { team: &'a mut Team, learn: bool },
    Scripted(&'a mut dyn RolePolicy),
}

/// Optional text sinks for one game.
#[derive(Default)]
pub struct GameLogs<'a> {
    pub experience: Option<&'a mut dyn Write>,
    pub events: Option<&'a mut dyn Write>,
}

fn write_line(out: &mut Option<&mut dyn Write>, line: &str) -> HarnessResult<()> {
    if let Some(w) = out {
        writeln!(w, "{line}").map_err(|e| HarnessError::Io {
            path: "log".into(),
            source: e,
        })?;
    }
    Ok(())
}

/// Random stream of game `game` in a trial seeded with `seed`.
pub fn game_rng(seed: u64, game: usize) -> SimRng {
    SimRng::seed_from_u64(splitmix(seed ^ splitmix(game as u64)))
}

/// Plays one game and returns its final score `(home, away)`.
///
/// Each home field player that is not the striker at a decision start
/// picks a role; when learning, its transition to the next decision start
/// is logged and applied at once. `episodes` holds every agent's current
/// learning-episode number: it advances at kickoff of each game and after
/// every transition with `γ' = 0`.
#[allow(clippy::too_many_arguments)]
pub fn play_game(
    config: &ExperimentConfig,
    home: &mut Home<'_>,
    opponent: &mut dyn RolePolicy,
    game: usize,
    episodes: &mut BTreeMap<u32, u64>,
    rng: &mut SimRng,
    acc: &mut BinAccumulator,
    logs: &mut GameLogs<'_>,
) -> HarnessResult<(u32, u32)> {
    let cfg = &config.soccer;
    let layout = config.layout();
    let mut world = WorldState::kickoff(cfg, config.experiment.team_size)?;
    let gamma = match home {
        Home::Learned { team, .. } => team.gamma(),
        Home::Scripted(_) => config.greedy_gq.gamma,
    };
    write_line(
        &mut logs.events,
        &EventRecord::new(world.tick, EventKind::GameStart, format!("game={game};opponent={}", opponent.name())).to_line(),
    )?;
    for id in field_players(config.experiment.team_size) {
        *episodes.entry(id).or_insert(0) += 1;
    }

    let mut step = 0u64;
    while world.tick < cfg.game_ticks {
        let striker = assign_striker(&world, cfg)?;
        let mut chosen = BTreeMap::new();
        let roles: BTreeMap<u32, Role> = match home {
            Home::Learned { team, learn } => {
                let mut roles = BTreeMap::new();
                for id in field_players(config.experiment.team_size) {
                    if id == striker {
                        continue;
                    }
                    let s = state_variables(&world, id, layout)?;
                    let (a, p) = team.choose(id, &s, *learn, rng)?;
                    roles.insert(id, ACTION_ROLES[a]);
                    chosen.insert(id, (s, a, p));
                }
                roles
            }
            Home::Scripted(policy) => policy.choose(&world, striker, cfg, rng)?,
        };

        let out = decision_step(&world, &roles, opponent, gamma, cfg.game_ticks, rng, cfg)?;
        for e in &out.events {
            write_line(&mut logs.events, &e.to_line())?;
        }

        if let Home::Learned { team, learn: true } = home {
            let next_world = if out.goal.is_some() { &out.end_of_play } else { &out.world };
            for (id, (s, a, p)) in chosen {
                let o = &out.agents[&id];
                let episode = episodes[&id];
                let record = ExperienceRecord {
                    episode,
                    step,
                    agent: id,
                    sample: GvfSample::new(s, a, o.r, o.z, o.gamma_next, state_variables(next_world, id, layout)?, p)?,
                };
                write_line(&mut logs.experience, &record.to_line())?;
                let diag = team.apply(&record)?;
                acc.record_update(&diag);
                if o.gamma_next == 0.0 {
                    episodes.insert(id, episode + 1);
                }
            }
        }
        world = out.world;
        step += 1;
    }

    write_line(
        &mut logs.events,
        &EventRecord::new(
            world.tick,
            EventKind::GameEnd,
            format!("home={};away={}", world.score.0, world.score.1),
        )
        .to_line(),
    )?;
    acc.record_game(world.score.0, world.score.1);
    Ok(world.score)
}

fn create(path: &Path) -> HarnessResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

fn opponents(config: &ExperimentConfig) -> HarnessResult<Vec<Box<dyn RolePolicy>>> {
    config
        .experiment
        .opponents
        .iter()
        .map(|name| policy_by_name(name).ok_or_else(|| HarnessError::Config(format!("unknown opponent {name:?}"))))
        .collect()
}

/// Plays every game of one trial, closing a bin every `bin_size` games.
/// On error the bins closed so far, plus the partial one, stay in `metrics`.
fn run_trial(
    config: &ExperimentConfig,
    trial: usize,
    home: &mut Home<'_>,
    dir: &Path,
    log_experience: bool,
    metrics: &mut RunMetrics,
) -> HarnessResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut experience = if log_experience {
        let path = dir.join("experience.log");
        let mut w = create(&path)?;
        writeln!(w, "{EXPERIENCE_HEADER}").map_err(|e| HarnessError::io(&path, e))?;
        Some(w)
    } else {
        None
    };
    let mut events = if config.output.event_log {
        let path = dir.join("events.log");
        let mut w = create(&path)?;
        writeln!(w, "{EVENT_HEADER}").map_err(|e| HarnessError::io(&path, e))?;
        Some(w)
    } else {
        None
    };

    let seed = config.trial_seed(trial);
    let mut opponents = opponents(config)?;
    let mut episodes = BTreeMap::new();
    let bin_size = config.experiment.bin_size;
    let mut acc = BinAccumulator::starting_at(0);
    let mut result = Ok(());
    for game in 0..config.experiment.games {
        let mut rng = game_rng(seed, game);
        let n = opponents.len();
        let opponent = opponents[game % n].as_mut();
        let mut logs = GameLogs {
            experience: experience.as_mut().map(|w| w as &mut dyn Write),
            events: events.as_mut().map(|w| w as &mut dyn Write),
        };
        if let Err(e) = play_game(config, home, opponent, game, &mut episodes, &mut rng, &mut acc, &mut logs) {
            result = Err(e);
            break;
        }
        if acc.games() == bin_size || game + 1 == config.experiment.games {
            let bin = game / bin_size;
            metrics.bins.push(acc.finish(trial, bin, weight_norm(home)));
            acc = BinAccumulator::starting_at(game + 1);
        }
    }
    if result.is_err() && acc.games() > 0 {
        let bin = metrics.trial_bins(trial).count();
        metrics.bins.push(acc.finish(trial, bin, weight_norm(home)));
    }
    for w in [experience.as_mut(), events.as_mut()].into_iter().flatten() {
        w.flush().map_err(|e| HarnessError::io(dir, e))?;
    }
    result
}

fn weight_norm(home: &Home<'_>) -> f64 {
    match home {
        Home::Learned { team, .. } => team.mean_policy_norm(),
        Home::Scripted(_) => 0.0,
    }
}

/// Runs `trials` independent training runs (or scripted baselines when the
/// home side is not `learned`) and writes everything under `out`.
pub fn run_training(config: &ExperimentConfig, out: &Path) -> HarnessResult<RunMetrics> {
    config.validate()?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let mut metrics = RunMetrics::default();
    for trial in 0..config.experiment.trials {
        let dir = out.join(format!("trial_{trial}"));
        let result = if config.learned() {
            let mut team = Team::new(config)?;
            let r = run_trial(
                config,
                trial,
                &mut Home::Learned { team: &mut team, learn: true },
                &dir,
                config.output.experience_log,
                &mut metrics,
            );
            r.and_then(|_| team.save(config, &dir))
        } else {
            let mut policy = policy_by_name(&config.experiment.home)
                .ok_or_else(|| HarnessError::Config(format!("unknown home policy {:?}", config.experiment.home)))?;
            run_trial(config, trial, &mut Home::Scripted(policy.as_mut()), &dir, false, &mut metrics)
        };
        if let Err(e) = result {
            metrics.write_csv(&out.join("metrics.csv"))?;
            return Err(e);
        }
    }
    metrics.write_csv(&out.join("metrics.csv"))?;
    Ok(metrics)
}

/// Plays the configured games with learners frozen at the checkpoints in
/// `checkpoints`: Greedy-GQ acts greedily, Off-PAC samples its Gibbs
/// policy. The checkpoint files are only read.
pub fn evaluate(config: &ExperimentConfig, checkpoints: &Path, out: &Path) -> HarnessResult<RunMetrics> {
    config.validate()?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let mut metrics = RunMetrics::default();
    for trial in 0..config.experiment.trials {
        let mut team = Team::load(config, checkpoints)?;
        let dir = out.join(format!("trial_{trial}"));
        let home = &mut Home::Learned { team: &mut team, learn: false };
        if let Err(e) = run_trial(config, trial, home, &dir, false, &mut metrics) {
            metrics.write_csv(&out.join("metrics.csv"))?;
            return Err(e);
        }
    }
    metrics.write_csv(&out.join("metrics.csv"))?;
    Ok(metrics)
}

/// Applies a logged experience stream, in order, to fresh learners and
/// writes their checkpoints to `out`.
pub fn replay_offline(config: &ExperimentConfig, log: &Path, out: &Path) -> HarnessResult<Team> {
    config.validate()?;
    let file = File::open(log).map_err(|e| HarnessError::io(log, e))?;
    let records = read_experience(BufReader::new(file))?;
    let mut team = Team::new(config)?;
    for r in &records {
        team.apply(r)?;
    }
    team.save(config, out)?;
    Ok(team)
}
