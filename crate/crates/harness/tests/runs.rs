use std::path::Path;

use gvf_core::{Checkpoint, GreedyGq, GreedyGqParams};
use gvf_harness::{evaluate, replay_offline, run_benchmarks, run_training, AgentLearner, ExperimentConfig, RunMetrics, Suite, Team};

fn quick(games: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.experiment.games = games;
    cfg.experiment.bin_size = 1;
    cfg.soccer.game_ticks = 400;
    cfg
}

fn body(path: &Path) -> String {
    // drop the metadata line, which holds a timestamp
    std::fs::read_to_string(path).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n")
}

#[test]
fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(2);
    run_training(&cfg, &dir.path().join("a")).unwrap();
    run_training(&cfg, &dir.path().join("b")).unwrap();
    assert_eq!(body(&dir.path().join("a/metrics.csv")), body(&dir.path().join("b/metrics.csv")));
    for f in ["events.log", "experience.log", "agent_2.ckpt", "agent_3.ckpt"] {
        let a = std::fs::read(dir.path().join("a/trial_0").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b/trial_0").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let mut other = cfg.clone();
    other.experiment.seed = 2;
    run_training(&other, &dir.path().join("c")).unwrap();
    assert_ne!(body(&dir.path().join("a/metrics.csv")), body(&dir.path().join("c/metrics.csv")));
}

#[test]
fn scripted_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(1);
    cfg.experiment.home = "random".into();
    cfg.experiment.opponents = vec!["random".into()];
    let m = run_training(&cfg, dir.path()).unwrap();
    assert_eq!(m.bins.len(), 1);
    let b = &m.bins[0];
    assert_eq!((b.games, b.updates, b.weight_norm), (1, 0, 0.0));
    assert_eq!(b.win + b.draw + b.loss, 1.0);
    assert_eq!(RunMetrics::read_csv(&dir.path().join("metrics.csv")).unwrap(), m);
    assert!(!dir.path().join("trial_0/experience.log").exists());
}

#[test]
fn bins_and_trials_are_laid_out() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(3);
    cfg.experiment.bin_size = 2;
    cfg.experiment.trials = 2;
    cfg.experiment.opponents = vec!["hand_coded".into(), "mirror".into()];
    let m = run_training(&cfg, dir.path()).unwrap();
    let layout: Vec<(usize, usize, usize, usize)> = m.bins.iter().map(|b| (b.trial, b.bin, b.first_game, b.games)).collect();
    assert_eq!(layout, vec![(0, 0, 0, 2), (0, 1, 2, 1), (1, 0, 0, 2), (1, 1, 2, 1)]);
    assert!(m.bins.iter().all(|b| b.updates > 0));
    assert!(dir.path().join("trial_1/agent_3.ckpt").exists());
}

#[test]
fn shared_weights_write_one_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(1);
    cfg.experiment.team_size = 4;
    cfg.experiment.shared_weights = true;
    run_training(&cfg, dir.path()).unwrap();
    assert!(dir.path().join("trial_0/shared.ckpt").exists());
    assert!(!dir.path().join("trial_0/agent_2.ckpt").exists());
    let team = Team::load(&cfg, &dir.path().join("trial_0")).unwrap();
    assert_eq!(team.learners().len(), 1);
}

#[test]
fn replay_of_an_empty_log_gives_fresh_learners() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(1);
    let log = dir.path().join("empty.log");
    std::fs::write(&log, format!("{}\n", gvf_core::gvf::EXPERIENCE_HEADER)).unwrap();
    let team = replay_offline(&cfg, &log, &dir.path().join("out")).unwrap();
    let fresh = Team::new(&cfg).unwrap();
    assert_eq!(team.learners(), fresh.learners());
    assert!(dir.path().join("out/agent_2.ckpt").exists());
}

#[test]
fn replay_matches_online_for_shared_offpac() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(2);
    cfg.experiment.algorithm = "offpac".into();
    cfg.experiment.shared_weights = true;
    run_training(&cfg, &dir.path().join("online")).unwrap();
    replay_offline(&cfg, &dir.path().join("online/trial_0/experience.log"), &dir.path().join("offline")).unwrap();
    assert_eq!(
        std::fs::read(dir.path().join("online/trial_0/shared.ckpt")).unwrap(),
        std::fs::read(dir.path().join("offline/shared.ckpt")).unwrap()
    );
}

#[test]
fn evaluation_of_zero_weights_is_greedy_on_action_zero_and_read_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(1);
    let ckpts = dir.path().join("ckpt");
    std::fs::create_dir_all(&ckpts).unwrap();
    let params = GreedyGqParams::for_active_count(cfg.layout().len() * cfg.tiles.num_tilings + 1);
    for path in Team::checkpoint_paths(&cfg, &ckpts) {
        GreedyGq::new(cfg.tiles.memory_size, params).unwrap().to_checkpoint().save(&path).unwrap();
    }
    let before: Vec<Vec<u8>> = Team::checkpoint_paths(&cfg, &ckpts).iter().map(|p| std::fs::read(p).unwrap()).collect();

    let team = Team::load(&cfg, &ckpts).unwrap();
    let mut rng = <gvf_soccer::SimRng as rand::SeedableRng>::seed_from_u64(0);
    let s = vec![0.5; cfg.layout().len()];
    assert_eq!(team.choose(2, &s, false, &mut rng).unwrap(), (0, 1.0));

    let out = dir.path().join("eval");
    let m = evaluate(&cfg, &ckpts, &out).unwrap();
    assert_eq!(m.bins.len(), 1);
    assert_eq!(m.bins[0].updates, 0);
    let events = std::fs::read_to_string(out.join("trial_0/events.log")).unwrap();
    // action 0 is FL: every logged home assignment gives the supporter FL
    let roles: Vec<&str> = events.lines().filter(|l| l.contains(",roles,")).collect();
    assert!(!roles.is_empty());
    assert!(roles.iter().all(|l| l.split(";away=").next().unwrap().contains("=FL")), "{roles:?}");
    let after: Vec<Vec<u8>> = Team::checkpoint_paths(&cfg, &ckpts).iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(before, after);
    assert!(!out.join("trial_0/experience.log").exists());
}

#[test]
fn evaluation_rejects_mismatched_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(1);
    run_training(&cfg, dir.path()).unwrap();
    let mut offpac = cfg.clone();
    offpac.experiment.algorithm = "offpac".into();
    assert!(evaluate(&offpac, &dir.path().join("trial_0"), &dir.path().join("e1")).is_err());
    let mut smaller = cfg.clone();
    smaller.tiles.memory_size = 1009;
    assert!(evaluate(&smaller, &dir.path().join("trial_0"), &dir.path().join("e2")).is_err());
    assert!(evaluate(&cfg, &dir.path().join("missing"), &dir.path().join("e3")).is_err());
}

#[test]
fn checkpoints_hold_learner_weights() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(1);
    run_training(&cfg, dir.path()).unwrap();
    let team = Team::load(&cfg, &dir.path().join("trial_0")).unwrap();
    let AgentLearner::GreedyGq(l) = team.learner(2).unwrap() else { panic!("greedy-gq expected") };
    assert!(!l.theta.is_all_zero());
    let ckpt = Checkpoint::load(&dir.path().join("trial_0/agent_2.ckpt")).unwrap();
    assert_eq!(ckpt.vector("theta").unwrap(), &l.theta);
}

#[test]
fn benchmarks_write_one_csv_per_suite() {
    let dir = tempfile::tempdir().unwrap();
    let paths = run_benchmarks(&[Suite::Bandit, Suite::Gradient], 0, dir.path()).unwrap();
    assert_eq!(paths.len(), 2);
    for p in paths {
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.lines().count() > 1, "{}", p.display());
    }
    assert!("nonsense".parse::<Suite>().is_err());
}
