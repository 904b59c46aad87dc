//! Finite MDPs and the value-iteration oracle.

use rand::Rng;

use crate::error::{contract, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub next: usize,
    pub prob: f64,
    pub reward: f64,
}

/// Tabular MDP. Terminal states have value zero; their outgoing rows are
/// still required to be distributions but are never used for bootstrapping.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    transitions: Vec<Vec<Vec<Transition>>>,
    terminal: Vec<bool>,
}

impl TabularMdp {
    /// `transitions[s][a]` lists the successors of `(s, a)`.
    pub fn new(
        gamma: f64,
        transitions: Vec<Vec<Vec<Transition>>>,
        terminal: Vec<bool>,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(contract(format!("gamma {gamma} outside [0, 1)")));
        }
        let n_states = transitions.len();
        let n_actions = transitions.first().map(Vec::len).unwrap_or(0);
        if n_states == 0 || n_actions == 0 {
            return Err(contract("MDP needs at least one state and one action"));
        }
        if terminal.len() != n_states {
            return Err(contract("terminal flags must cover every state"));
        }
        for (s, row) in transitions.iter().enumerate() {
            if row.len() != n_actions {
                return Err(contract(format!("state {s} has {} actions", row.len())));
            }
            for (a, outcomes) in row.iter().enumerate() {
                let mut total = 0.0;
                for t in outcomes {
                    if t.next >= n_states || !(t.prob >= 0.0) || !t.reward.is_finite() {
                        return Err(contract(format!("bad transition from ({s}, {a}): {t:?}")));
                    }
                    total += t.prob;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(contract(format!("row ({s}, {a}) sums to {total}")));
                }
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            gamma,
            transitions,
            terminal,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn transitions(&self, s: usize, a: usize) -> &[Transition] {
        &self.transitions[s][a]
    }

    /// `E[r + γ·[s' non-terminal]·next(s')]` for `(s, a)`.
    pub fn backup(&self, s: usize, a: usize, next: impl Fn(usize) -> f64) -> f64 {
        self.transitions[s][a]
            .iter()
            .map(|t| {
                let cont = if self.terminal[t.next] { 0.0 } else { self.gamma * next(t.next) };
                t.prob * (t.reward + cont)
            })
            .sum()
    }

    /// Samples a successor and its reward.
    pub fn step<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> (usize, f64) {
        let outcomes = &self.transitions[s][a];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for t in outcomes {
            acc += t.prob;
            if u < acc {
                return (t.next, t.reward);
            }
        }
        let last = outcomes.iter().rev().find(|t| t.prob > 0.0).unwrap_or(&outcomes[0]);
        (last.next, last.reward)
    }
}

/// Optimal action values and the greedy policy (lowest id on ties).
#[derive(Clone, Debug, PartialEq)]
pub struct ValueSolution {
    pub q: Vec<Vec<f64>>,
    pub policy: Vec<usize>,
}

impl ValueSolution {
    /// Actions within `tol` of the best value in each state.
    pub fn optimal_sets(&self, tol: f64) -> Vec<Vec<usize>> {
        self.q
            .iter()
            .map(|row| {
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (0..row.len()).filter(|&a| row[a] >= best - tol).collect()
            })
            .collect()
    }
}

fn greedy(row: &[f64]) -> usize {
    let mut best = 0;
    for a in 1..row.len() {
        if row[a] > row[best] {
            best = a;
        }
    }
    best
}

fn max_row(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Sup-norm of `Q − T*Q`.
pub fn bellman_residual(mdp: &TabularMdp, q: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let target = if mdp.terminal[s] { 0.0 } else { mdp.backup(s, a, |n| max_row(&q[n])) };
            worst = worst.max((q[s][a] - target).abs());
        }
    }
    worst
}

/// Iterates `Q ← T*Q` until the Bellman residual is at most `tol·(1−γ)`,
/// which bounds the distance to `Q*` by `tol`.
pub fn value_iteration(mdp: &TabularMdp, tol: f64) -> Result<ValueSolution> {
    if !(tol > 0.0) {
        return Err(contract("tolerance must be positive"));
    }
    let stop = tol * (1.0 - mdp.gamma);
    let mut q = vec![vec![0.0; mdp.n_actions]; mdp.n_states];
    loop {
        let next: Vec<Vec<f64>> = (0..mdp.n_states)
            .map(|s| {
                (0..mdp.n_actions)
                    .map(|a| if mdp.terminal[s] { 0.0 } else { mdp.backup(s, a, |n| max_row(&q[n])) })
                    .collect()
            })
            .collect();
        let change = q
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        q = next;
        if change <= stop {
            break;
        }
    }
    let policy = q.iter().map(|row| greedy(row)).collect();
    Ok(ValueSolution { q, policy })
}

/// One state, one action, reward `r` forever.
pub fn single_state(reward: f64, gamma: f64) -> Result<TabularMdp> {
    TabularMdp::new(
        gamma,
        vec![vec![vec![Transition { next: 0, prob: 1.0, reward }]]],
        vec![false],
    )
}

/// State 0 moves to the absorbing state 1 with reward 0; state 1 loops
/// with reward 1. `Q(1) = 1/(1−γ)`, `Q(0) = γ/(1−γ)`.
pub fn two_state_chain(gamma: f64) -> Result<TabularMdp> {
    TabularMdp::new(
        gamma,
        vec![
            vec![vec![Transition { next: 1, prob: 1.0, reward: 0.0 }]],
            vec![vec![Transition { next: 1, prob: 1.0, reward: 1.0 }]],
        ],
        vec![false, false],
    )
}

pub const GRID_UP: usize = 0;
pub const GRID_DOWN: usize = 1;
pub const GRID_LEFT: usize = 2;
pub const GRID_RIGHT: usize = 3;

/// `size × size` grid, row-major, goal in the last cell. Moves into a wall
/// leave the agent in place; every move costs 1.
pub fn gridworld(size: usize, gamma: f64) -> Result<TabularMdp> {
    if size < 2 {
        return Err(contract("grid needs at least 2 cells per side"));
    }
    let n = size * size;
    let goal = n - 1;
    let transitions = (0..n)
        .map(|s| {
            let (r, c) = (s / size, s % size);
            [GRID_UP, GRID_DOWN, GRID_LEFT, GRID_RIGHT]
                .iter()
                .map(|&a| {
                    let next = if s == goal {
                        s
                    } else {
                        match a {
                            GRID_UP if r > 0 => s - size,
                            GRID_DOWN if r + 1 < size => s + size,
                            GRID_LEFT if c > 0 => s - 1,
                            GRID_RIGHT if c + 1 < size => s + 1,
                            _ => s,
                        }
                    };
                    let reward = if s == goal { 0.0 } else { -1.0 };
                    vec![Transition { next, prob: 1.0, reward }]
                })
                .collect()
        })
        .collect();
    let mut terminal = vec![false; n];
    terminal[goal] = true;
    TabularMdp::new(gamma, transitions, terminal)
}
