//! Per-bin run metrics and their CSV form.
//!
//! `metrics.csv` starts with one `#` metadata line (the only place a
//! timestamp appears), then this header:
//!
//! ```text
//! trial,bin,first_game,games,goal_difference,goals_for,goals_against,win,draw,loss,updates,delta_mean,delta_rms,rho_mean,trace_mean,weight_norm
//! ```
//!
//! Goal figures are per-game means within the bin; `win`, `draw`, `loss`
//! are fractions of the bin's games. `delta_*`, `rho_mean` and
//! `trace_mean` summarize the learner updates made during the bin, and
//! `weight_norm` is the mean policy-weight norm at the bin's end (zero for
//! scripted teams).

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use gvf_core::UpdateDiagnostics;

use crate::error::{HarnessError, HarnessResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinMetrics {
    pub trial: usize,
    pub bin: usize,
    pub first_game: usize,
    pub games: usize,
    pub goal_difference: f64,
    pub goals_for: f64,
    pub goals_against: f64,
    pub win: f64,
    pub draw: f64,
    pub loss: f64,
    pub updates: u64,
    pub delta_mean: f64,
    pub delta_rms: f64,
    pub rho_mean: f64,
    pub trace_mean: f64,
    pub weight_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunMetrics {
    pub bins: Vec<BinMetrics>,
}

impl RunMetrics {
    pub fn trial_bins(&self, trial: usize) -> impl Iterator<Item = &BinMetrics> {
        self.bins.iter().filter(move |b| b.trial == trial)
    }

    /// Mean of the per-bin goal differences.
    pub fn mean_goal_difference(&self) -> f64 {
        mean(self.bins.iter().map(|b| b.goal_difference))
    }

    pub fn write_csv(&self, path: &Path) -> HarnessResult<()> {
        let mut file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(file, "# generated_unix={stamp}").map_err(|e| HarnessError::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        if self.bins.is_empty() {
            w.write_record(HEADER)?;
        }
        for b in &self.bins {
            w.serialize(b)?;
        }
        w.flush().map_err(|e| HarnessError::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect();
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let bins = r.deserialize().collect::<Result<Vec<BinMetrics>, _>>()?;
        Ok(Self { bins })
    }
}

const HEADER: [&str; 16] = [
    "trial",
    "bin",
    "first_game",
    "games",
    "goal_difference",
    "goals_for",
    "goals_against",
    "win",
    "draw",
    "loss",
    "updates",
    "delta_mean",
    "delta_rms",
    "rho_mean",
    "trace_mean",
    "weight_norm",
];

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Running totals for the bin being played.
#[derive(Clone, Debug, Default)]
pub struct BinAccumulator {
    first_game: usize,
    games: usize,
    goals_for: u64,
    goals_against: u64,
    wins: usize,
    draws: usize,
    updates: u64,
    delta_sum: f64,
    delta_sq: f64,
    rho_sum: f64,
    trace_sum: f64,
}

impl BinAccumulator {
    pub fn starting_at(first_game: usize) -> Self {
        Self {
            first_game,
            ..Self::default()
        }
    }

    pub fn games(&self) -> usize {
        self.games
    }

    pub fn record_game(&mut self, goals_for: u32, goals_against: u32) {
        self.games += 1;
        self.goals_for += u64::from(goals_for);
        self.goals_against += u64::from(goals_against);
        match goals_for.cmp(&goals_against) {
            std::cmp::Ordering::Greater => self.wins += 1,
            std::cmp::Ordering::Equal => self.draws += 1,
            std::cmp::Ordering::Less => {}
        }
    }

    pub fn record_update(&mut self, d: &UpdateDiagnostics) {
        self.updates += 1;
        self.delta_sum += d.delta;
        self.delta_sq += d.delta * d.delta;
        self.rho_sum += d.rho;
        self.trace_sum += d.trace_len as f64;
    }

    pub fn finish(&self, trial: usize, bin: usize, weight_norm: f64) -> BinMetrics {
        let g = self.games.max(1) as f64;
        let u = self.updates.max(1) as f64;
        let win = self.wins as f64 / g;
        let draw = self.draws as f64 / g;
        BinMetrics {
            trial,
            bin,
            first_game: self.first_game,
            games: self.games,
            goal_difference: (self.goals_for as f64 - self.goals_against as f64) / g,
            goals_for: self.goals_for as f64 / g,
            goals_against: self.goals_against as f64 / g,
            win,
            draw,
            loss: if self.games == 0 { 0.0 } else { (self.games - self.wins - self.draws) as f64 / g },
            updates: self.updates,
            delta_mean: self.delta_sum / u,
            delta_rms: (self.delta_sq / u).sqrt(),
            rho_mean: self.rho_sum / u,
            trace_mean: self.trace_sum / u,
            weight_norm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_sum_to_one() {
        let mut acc = BinAccumulator::starting_at(0);
        for (f, a) in [(1, 0), (0, 0), (0, 2), (3, 1), (2, 2)] {
            acc.record_game(f, a);
        }
        let b = acc.finish(0, 0, 0.0);
        assert!((b.win + b.draw + b.loss - 1.0).abs() < 1e-9);
        assert_eq!((b.win, b.draw, b.loss), (0.4, 0.4, 0.2));
        assert_eq!(b.goal_difference, 1.0 / 5.0);
    }

    #[test]
    fn csv_round_trip_skips_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let mut acc = BinAccumulator::starting_at(20);
        acc.record_game(2, 1);
        acc.record_update(&UpdateDiagnostics { delta: 0.5, rho: 2.0, trace_len: 3, actor_trace_len: 0 });
        let run = RunMetrics { bins: vec![acc.finish(1, 1, 0.25)] };
        run.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# generated_unix="));
        assert_eq!(text.lines().nth(1).unwrap(), HEADER.join(","));
        assert_eq!(RunMetrics::read_csv(&path).unwrap(), run);
    }
}
