use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gvf_harness::{evaluate, replay_offline, run_benchmarks, run_training, ExperimentConfig, HarnessResult, Suite};

#[derive(Parser, Debug)]
#[command(name = "gvf", version, about = "Role-assignment learning in a small soccer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Overrides {
    /// TOML config; omitted sections keep their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    games: Option<usize>,
    #[arg(long)]
    team_size: Option<usize>,
    /// greedy_gq or offpac
    #[arg(long)]
    algo: Option<String>,
    /// One learner for the whole team
    #[arg(long)]
    shared_weights: bool,
}

impl Overrides {
    fn resolve(&self) -> HarnessResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let e = &mut cfg.experiment;
        if let Some(s) = self.seed {
            e.seed = s;
        }
        if let Some(g) = self.games {
            e.games = g;
        }
        if let Some(n) = self.team_size {
            e.team_size = n;
        }
        if let Some(a) = &self.algo {
            e.algorithm = a.clone();
        }
        if self.shared_weights {
            e.shared_weights = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train learners (or run a scripted baseline) and write metrics, logs and checkpoints
    Train {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "runs/train")]
        out: PathBuf,
    },
    /// Learn from a logged experience file and write checkpoints
    Replay {
        #[command(flatten)]
        overrides: Overrides,
        /// experience.log written by a training run
        log: PathBuf,
        #[arg(long, default_value = "runs/replay")]
        out: PathBuf,
    },
    /// Play games with frozen checkpoints and report metrics
    Evaluate {
        #[command(flatten)]
        overrides: Overrides,
        /// Directory holding the agent checkpoints
        checkpoints: PathBuf,
        #[arg(long, default_value = "runs/evaluate")]
        out: PathBuf,
    },
    /// Print the default configuration as TOML
    Defaults,
    /// Run diagnostic benchmarks and write one CSV per suite
    Bench {
        /// Suites to run (baird_td, baird_gtd, gridworld, bandit, gradient); all when empty
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "runs/bench")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> HarnessResult<()> {
    match cli.command {
        Command::Train { overrides, out } => {
            let metrics = run_training(&overrides.resolve()?, &out)?;
            println!(
                "{} bins, mean goal difference {:.3}; output in {}",
                metrics.bins.len(),
                metrics.mean_goal_difference(),
                out.display()
            );
        }
        Command::Replay { overrides, log, out } => {
            let team = replay_offline(&overrides.resolve()?, &log, &out)?;
            println!("replayed into {} learner(s); checkpoints in {}", team.learners().len(), out.display());
        }
        Command::Evaluate {
            overrides,
            checkpoints,
            out,
        } => {
            let metrics = evaluate(&overrides.resolve()?, &checkpoints, &out)?;
            println!("mean goal difference {:.3} over {} bins", metrics.mean_goal_difference(), metrics.bins.len());
        }
        Command::Defaults => print!("{}", ExperimentConfig::default().to_toml()),
        Command::Bench { only, seed, out } => {
            let suites = if only.is_empty() {
                Suite::ALL.to_vec()
            } else {
                only.iter().map(|s| s.parse()).collect::<HarnessResult<Vec<Suite>>>()?
            };
            for path in run_benchmarks(&suites, seed, &out)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
