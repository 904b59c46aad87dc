//! General value function questions, answers, and logged samples.
//!
//! A GVF is asked by its question functions (target policy π, continuation
//! γ, transient reward r, terminal reward z) and learned through its answer
//! functions (behavior policy, interest I, features φ, trace decay λ).
//! Environments evaluate r, z and γ at the successor state and hand the
//! results to learners inside a [`GvfSample`].

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{contract, GvfError, Result};

/// A real function of the state variables.
#[derive(Clone)]
pub enum StateFn {
    Constant(f64),
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl StateFn {
    pub fn eval(&self, state: &[f64]) -> f64 {
        match self {
            StateFn::Constant(c) => *c,
            StateFn::Custom(f) => f(state),
        }
    }

    /// Evaluates and checks the result lies in `[0, 1]`.
    pub fn eval_unit(&self, state: &[f64], name: &str) -> Result<f64> {
        let v = self.eval(state);
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(contract(format!("{name} returned {v}, outside [0, 1]")))
        }
    }
}

impl fmt::Debug for StateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFn::Constant(c) => write!(f, "Constant({c})"),
            StateFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// How the target policy is derived from the learned weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetPolicy {
    /// Greedy with respect to `θᵀφ(s, a)`.
    Greedy,
    /// Gibbs distribution over `uᵀφ(s, a)`.
    Gibbs,
}

#[derive(Clone, Debug)]
pub struct QuestionFunctions {
    pub target: TargetPolicy,
    pub gamma: StateFn,
    pub transient_reward: StateFn,
    pub terminal_reward: StateFn,
}

impl QuestionFunctions {
    /// Constant continuation; rewards arrive with each sample.
    pub fn constant(target: TargetPolicy, gamma: f64) -> Self {
        Self {
            target,
            gamma: StateFn::Constant(gamma),
            transient_reward: StateFn::Constant(0.0),
            terminal_reward: StateFn::Constant(0.0),
        }
    }

    /// Builds a sample by evaluating r, z and γ at the successor state.
    pub fn observe(
        &self,
        state: Vec<f64>,
        action: usize,
        next_state: Vec<f64>,
        behavior_prob: f64,
    ) -> Result<GvfSample> {
        GvfSample::new(
            state,
            action,
            self.transient_reward.eval(&next_state),
            self.terminal_reward.eval(&next_state),
            self.gamma.eval_unit(&next_state, "gamma")?,
            next_state,
            behavior_prob,
        )
    }
}

/// Answer functions other than the behavior policy and the feature map,
/// which learners and harness receive separately.
#[derive(Clone, Debug)]
pub struct AnswerFunctions {
    pub interest: StateFn,
    pub lambda: StateFn,
    /// Trace decay of the actor trace; only Off-PAC reads it.
    pub actor_lambda: StateFn,
}

impl AnswerFunctions {
    /// Unit interest and one constant λ for every trace.
    pub fn constant(lambda: f64) -> Self {
        Self {
            interest: StateFn::Constant(1.0),
            lambda: StateFn::Constant(lambda),
            actor_lambda: StateFn::Constant(lambda),
        }
    }

    pub fn with_actor_lambda(mut self, lambda: f64) -> Self {
        self.actor_lambda = StateFn::Constant(lambda);
        self
    }
}

/// One off-policy transition `(S_t, A_t, r, z, γ(S_{t+1}), S_{t+1}, π_b(A_t|S_t))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GvfSample {
    pub state: Vec<f64>,
    pub action: usize,
    pub transient_reward: f64,
    pub terminal_reward: f64,
    pub gamma_next: f64,
    pub next_state: Vec<f64>,
    pub behavior_prob: f64,
}

impl GvfSample {
    pub fn new(
        state: Vec<f64>,
        action: usize,
        transient_reward: f64,
        terminal_reward: f64,
        gamma_next: f64,
        next_state: Vec<f64>,
        behavior_prob: f64,
    ) -> Result<Self> {
        let sample = Self {
            state,
            action,
            transient_reward,
            terminal_reward,
            gamma_next,
            next_state,
            behavior_prob,
        };
        sample.validate()?;
        Ok(sample)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.behavior_prob > 0.0 && self.behavior_prob <= 1.0) {
            return Err(contract(format!(
                "behavior probability {} must lie in (0, 1]",
                self.behavior_prob
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma_next) {
            return Err(contract(format!("gamma_next {} outside [0, 1]", self.gamma_next)));
        }
        if !(self.transient_reward.is_finite() && self.terminal_reward.is_finite()) {
            return Err(contract("rewards must be finite"));
        }
        if self.state.len() != self.next_state.len() {
            return Err(contract("state and successor must have the same number of variables"));
        }
        Ok(())
    }

    /// Bootstrapped target given `next_value` at the successor.
    pub fn target(&self, next_value: f64) -> f64 {
        corrected_return_target(self, next_value)
    }
}

/// `r + (1 - γ')·z + γ'·next_value`.
pub fn corrected_return_target(sample: &GvfSample, next_value: f64) -> f64 {
    let g = sample.gamma_next;
    sample.transient_reward + (1.0 - g) * sample.terminal_reward + g * next_value
}

/// `Σ r_k + z_T`.
pub fn complete_return(rewards: &[f64], terminal: f64) -> f64 {
    rewards.iter().sum::<f64>() + terminal
}

/// One line of the experience log.
///
/// Text layout, comma separated, reals in `{:.16e}` (17 significant digits):
///
/// ```text
/// episode,step,agent,action,transient_reward,terminal_reward,gamma_next,behavior_prob,n,s_1..s_n,s'_1..s'_n
/// ```
///
/// `n` is the number of state variables; the current state's variables are
/// followed by the successor's. Lines starting with `#` are comments.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperienceRecord {
    /// Learning-episode counter of the agent; a change resets its traces.
    pub episode: u64,
    pub step: u64,
    pub agent: u32,
    pub sample: GvfSample,
}

pub const EXPERIENCE_HEADER: &str = "# episode,step,agent,action,transient_reward,terminal_reward,gamma_next,behavior_prob,n,state[n],next_state[n]";

fn push_real(line: &mut String, x: f64) {
    line.push(',');
    line.push_str(&format!("{x:.16e}"));
}

impl ExperienceRecord {
    pub fn to_line(&self) -> String {
        let s = &self.sample;
        let mut line = format!("{},{},{},{}", self.episode, self.step, self.agent, s.action);
        for x in [s.transient_reward, s.terminal_reward, s.gamma_next, s.behavior_prob] {
            push_real(&mut line, x);
        }
        line.push_str(&format!(",{}", s.state.len()));
        for &x in s.state.iter().chain(&s.next_state) {
            push_real(&mut line, x);
        }
        line
    }

    pub fn parse_line(line: &str, line_no: usize) -> Result<Self> {
        let err = |message: String| GvfError::Parse { line: line_no, message };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() < 9 {
            return Err(err(format!("expected at least 9 fields, found {}", fields.len())));
        }
        let int = |k: usize, name: &str| -> Result<u64> {
            fields[k]
                .trim()
                .parse::<u64>()
                .map_err(|e| err(format!("{name}: {e}")))
        };
        let real = |k: usize| -> Result<f64> {
            let v = fields[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| err(format!("field {}: {e}", k + 1)))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("field {} is not finite", k + 1)))
            }
        };
        let n = int(8, "n")? as usize;
        if fields.len() != 9 + 2 * n {
            return Err(err(format!(
                "expected {} fields for {n} state variables, found {}",
                9 + 2 * n,
                fields.len()
            )));
        }
        let state = (9..9 + n).map(real).collect::<Result<Vec<_>>>()?;
        let next_state = (9 + n..9 + 2 * n).map(real).collect::<Result<Vec<_>>>()?;
        let agent = u32::try_from(int(2, "agent")?).map_err(|e| err(format!("agent: {e}")))?;
        let sample = GvfSample::new(
            state,
            int(3, "action")? as usize,
            real(4)?,
            real(5)?,
            real(6)?,
            next_state,
            real(7)?,
        )
        .map_err(|e| err(e.to_string()))?;
        Ok(Self {
            episode: int(0, "episode")?,
            step: int(1, "step")?,
            agent,
            sample,
        })
    }
}

pub fn write_experience<W: Write>(out: &mut W, records: &[ExperienceRecord]) -> Result<()> {
    writeln!(out, "{EXPERIENCE_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    Ok(())
}

pub fn read_experience<R: BufRead>(input: R) -> Result<Vec<ExperienceRecord>> {
    let mut records = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        records.push(ExperienceRecord::parse_line(trimmed, k + 1)?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(r: f64, z: f64, g: f64) -> GvfSample {
        GvfSample::new(vec![0.0], 0, r, z, g, vec![1.0], 1.0).unwrap()
    }

    #[test]
    fn corrected_target_examples() {
        assert_eq!(corrected_return_target(&sample(0.5, 42.0, 1.0), 3.0), 3.5);
        assert_eq!(corrected_return_target(&sample(0.5, 42.0, 0.0), 1e9), 42.5);
        let t = corrected_return_target(&sample(-0.01, 0.0, 0.8), 1.0);
        assert!((t - 0.79).abs() < 1e-15);
    }

    #[test]
    fn complete_return_examples() {
        assert_eq!(complete_return(&[], 100.0), 100.0);
        assert!((complete_return(&[-0.01, -0.01], -100.0) - (-100.02)).abs() < 1e-12);
        assert_eq!(complete_return(&[1.0, 2.0, 3.0], 0.0), 6.0);
    }

    #[test]
    fn sample_validation() {
        assert!(GvfSample::new(vec![], 0, 0.0, 0.0, 0.5, vec![], 0.0).is_err());
        assert!(GvfSample::new(vec![], 0, 0.0, 0.0, 1.5, vec![], 0.5).is_err());
        assert!(GvfSample::new(vec![], 0, f64::NAN, 0.0, 0.5, vec![], 0.5).is_err());
    }

    #[test]
    fn question_observe_evaluates_at_successor() {
        let q = QuestionFunctions {
            target: TargetPolicy::Greedy,
            gamma: StateFn::Custom(Arc::new(|s| if s[0] >= 4.0 { 0.0 } else { 0.9 })),
            transient_reward: StateFn::Constant(-1.0),
            terminal_reward: StateFn::Custom(Arc::new(|s| s[0])),
        };
        let smp = q.observe(vec![3.0], 1, vec![4.0], 0.25).unwrap();
        assert_eq!((smp.transient_reward, smp.terminal_reward, smp.gamma_next), (-1.0, 4.0, 0.0));
        let bad = QuestionFunctions {
            gamma: StateFn::Constant(1.2),
            ..q
        };
        assert!(bad.observe(vec![0.0], 0, vec![0.0], 1.0).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# header\n1,2,3,0,0,0,0.5,1,1,0.5,0.5\n1,2,3,0,0,0,0.5,0,1,0.5,0.5\n";
        match read_experience(text.as_bytes()) {
            Err(GvfError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "1,2,3,0,0,0,0.5,1,2,0.5,0.5\n";
        assert!(matches!(read_experience(text.as_bytes()), Err(GvfError::Parse { line: 1, .. })));
        assert!(read_experience("".as_bytes()).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn telescoping_matches_complete_return(
            rewards in proptest::collection::vec(-10.0f64..10.0, 1..30),
            terminal in -100.0f64..100.0,
        ) {
            // γ = 1 until the final step, whose γ = 0 carries z
            let n = rewards.len();
            let mut next_value = 0.0;
            for k in (0..n).rev() {
                let (g, z) = if k == n - 1 { (0.0, terminal) } else { (1.0, 0.0) };
                next_value = corrected_return_target(&sample(rewards[k], z, g), next_value);
            }
            let direct = complete_return(&rewards, terminal);
            prop_assert!((next_value - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
        }

        #[test]
        fn target_is_linear_in_next_value(
            r in -5.0f64..5.0, z in -100.0f64..100.0, g in 0.0f64..=1.0,
            a in -50.0f64..50.0, b in -50.0f64..50.0,
        ) {
            let s = sample(r, z, g);
            let slope = (corrected_return_target(&s, a) - corrected_return_target(&s, b)) / (a - b);
            prop_assume!((a - b).abs() > 1e-3);
            prop_assert!((slope - g).abs() < 1e-9);
        }

        #[test]
        fn experience_lines_round_trip(
            state in proptest::collection::vec(-1e3f64..1e3, 0..6),
            r in -1e3f64..1e3, z in -100.0f64..100.0, g in 0.0f64..=1.0, p in 1e-6f64..=1.0,
            episode in any::<u32>(), step in any::<u32>(), agent in 0u32..12, action in 0usize..12,
        ) {
            let next: Vec<f64> = state.iter().map(|x| x * 0.5 - 1.0 / 3.0).collect();
            let rec = ExperienceRecord {
                episode: episode as u64,
                step: step as u64,
                agent,
                sample: GvfSample::new(state, action, r, z, g, next, p).unwrap(),
            };
            let back = ExperienceRecord::parse_line(&rec.to_line(), 1).unwrap();
            prop_assert_eq!(back, rec);
        }
    }
}
