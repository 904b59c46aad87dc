//! Diagnostic benchmark suites written as `step,metric,value` CSVs.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gvf_core::bench::{
    gradient_check, run_baird_gtd, run_baird_td0, run_gridworld_greedy_gq, run_offpac_bandit, write_metric_rows,
    BairdConfig, BanditConfig, GridworldConfig, MetricRow,
};

use crate::error::{HarnessError, HarnessResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    /// Off-policy TD(0) weight norm on Baird's counterexample.
    BairdTd,
    /// GTD critic MSPBE on Baird's counterexample.
    BairdGtd,
    /// Greedy-GQ policy-match fraction on the 5×5 gridworld.
    Gridworld,
    /// Off-PAC probability of the better bandit arm.
    Bandit,
    /// Gibbs log-gradient finite-difference errors.
    Gradient,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::BairdTd, Suite::BairdGtd, Suite::Gridworld, Suite::Bandit, Suite::Gradient];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BairdTd => "baird_td",
            Suite::BairdGtd => "baird_gtd",
            Suite::Gridworld => "gridworld",
            Suite::Bandit => "bandit",
            Suite::Gradient => "gradient",
        }
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown benchmark {s:?}")))
    }
}

fn rows(suite: Suite, seed: u64) -> HarnessResult<Vec<MetricRow>> {
    Ok(match suite {
        Suite::BairdTd => run_baird_td0(&BairdConfig::default(), seed)?.rows,
        Suite::BairdGtd => run_baird_gtd(&BairdConfig::default(), seed)?.rows,
        Suite::Gridworld => run_gridworld_greedy_gq(&GridworldConfig::default(), seed)?.rows,
        Suite::Bandit => run_offpac_bandit(&BanditConfig::default(), seed)?.rows,
        Suite::Gradient => gradient_check(100, 1e-6, seed)?.rows,
    })
}

/// Runs each selected suite and writes `<out>/<suite>.csv`.
pub fn run_benchmarks(selection: &[Suite], seed: u64, out: &Path) -> HarnessResult<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let mut written = Vec::new();
    for &suite in selection {
        let path = out.join(format!("{}.csv", suite.name()));
        let file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
        write_metric_rows(&mut BufWriter::new(file), &rows(suite, seed)?)?;
        written.push(path);
    }
    Ok(written)
}
