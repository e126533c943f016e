//! Tabular TD(0) control: Q-learning, SARSA, Expected SARSA, Double Q-learning.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Env, Position};
use crate::error::{Error, Result};

/// Dense action-value table, one row per grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize, init: f64) -> Self {
        QTable { n_states, n_actions, values: vec![init; n_states * n_actions] }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    #[inline]
    pub fn row_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    #[inline]
    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.n_actions + a] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn max(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-index argmax.
    pub fn argmax(&self, s: usize) -> usize {
        first_argmax(self.row(s))
    }

    /// `state,action,value` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,action,value\n");
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                out.push_str(&format!("{s},{a},{}\n", self.get(s, a)));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: &str| Error::Csv { line: i + 1, message: message.to_string() };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(bad("expected 3 fields"));
            }
            let s: usize = fields[0].trim().parse().map_err(|_| bad("bad state index"))?;
            let a: usize = fields[1].trim().parse().map_err(|_| bad("bad action index"))?;
            let v: f64 = fields[2].trim().parse().map_err(|_| bad("bad value"))?;
            if !v.is_finite() {
                return Err(bad("non-finite value"));
            }
            entries.push((s, a, v));
        }
        let n_states = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let n_actions = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
        if entries.len() != n_states * n_actions {
            return Err(Error::Csv { line: 0, message: "table is not dense".into() });
        }
        let mut table = QTable::new(n_states, n_actions, 0.0);
        for (s, a, v) in entries {
            table.set(s, a, v);
        }
        Ok(table)
    }

    fn elementwise_sum(&self, other: &QTable) -> QTable {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        QTable { n_states: self.n_states, n_actions: self.n_actions, values }
    }
}

#[inline]
pub(crate) fn first_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Argmax with ties broken uniformly at random.
#[inline]
fn random_argmax<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let mut best = 0;
    let mut ties = 1u32;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
            ties = 1;
        } else if v == row[best] {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = i;
            }
        }
    }
    best
}

#[inline]
fn eps_greedy_row<R: Rng + ?Sized>(row: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..row.len())
    } else {
        random_argmax(row, rng)
    }
}

pub fn eps_greedy<R: Rng + ?Sized>(q: &QTable, s: usize, epsilon: f64, rng: &mut R) -> usize {
    eps_greedy_row(q.row(s), epsilon, rng)
}

/// Expected value of a row under the epsilon-greedy policy: each action gets
/// `epsilon / |A|`, the remaining mass is split evenly across argmax actions.
pub fn eps_greedy_expectation(row: &[f64], epsilon: f64) -> f64 {
    let n = row.len() as f64;
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = row.iter().sum::<f64>() / n;
    epsilon * mean + (1.0 - epsilon) * max
}

#[inline]
fn td_step(q: &mut QTable, s: usize, a: usize, target: f64, alpha: f64) {
    let i = s * q.n_actions + a;
    q.values[i] += alpha * (target - q.values[i]);
}

/// `next = None` marks a terminal transition; its target is the reward alone.
pub fn q_update(q: &mut QTable, s: usize, a: usize, r: f64, next: Option<usize>, alpha: f64, gamma: f64) {
    let target = match next {
        Some(n) => r + gamma * q.max(n),
        None => r,
    };
    td_step(q, s, a, target, alpha);
}

pub fn sarsa_update(q: &mut QTable, s: usize, a: usize, r: f64, next: Option<(usize, usize)>, alpha: f64, gamma: f64) {
    let target = match next {
        Some((n, a_next)) => r + gamma * q.get(n, a_next),
        None => r,
    };
    td_step(q, s, a, target, alpha);
}

#[allow(clippy::too_many_arguments)]
pub fn expected_sarsa_update(
    q: &mut QTable,
    s: usize,
    a: usize,
    r: f64,
    next: Option<usize>,
    alpha: f64,
    gamma: f64,
    epsilon: f64,
) {
    let target = match next {
        Some(n) => r + gamma * eps_greedy_expectation(q.row(n), epsilon),
        None => r,
    };
    td_step(q, s, a, target, alpha);
}

/// Which table a Double Q step updated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DoubleBranch {
    A,
    B,
}

#[allow(clippy::too_many_arguments)]
pub fn double_q_update<R: Rng + ?Sized>(
    qa: &mut QTable,
    qb: &mut QTable,
    s: usize,
    a: usize,
    r: f64,
    next: Option<usize>,
    alpha: f64,
    gamma: f64,
    rng: &mut R,
) -> DoubleBranch {
    let branch = if rng.random::<bool>() { DoubleBranch::A } else { DoubleBranch::B };
    let (upd, other) = match branch {
        DoubleBranch::A => (qa, qb),
        DoubleBranch::B => (qb, qa),
    };
    let target = match next {
        Some(n) => {
            let best = random_argmax(upd.row(n), rng);
            r + gamma * other.get(n, best)
        }
        None => r,
    };
    td_step(upd, s, a, target, alpha);
    branch
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "q")]
    QLearning,
    #[serde(rename = "sarsa")]
    Sarsa,
    #[serde(rename = "expected_sarsa")]
    ExpectedSarsa,
    #[serde(rename = "double_q")]
    DoubleQ,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::QLearning, Algorithm::Sarsa, Algorithm::ExpectedSarsa, Algorithm::DoubleQ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::QLearning => "q",
            Algorithm::Sarsa => "sarsa",
            Algorithm::ExpectedSarsa => "expected_sarsa",
            Algorithm::DoubleQ => "double_q",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| Error::InvalidConfig {
            path: "algorithm".into(),
            message: format!("unknown algorithm `{s}`"),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonSchedule {
    Constant,
    /// `max(min, start * exp(-t / time_constant))`; the time constant defaults
    /// to a fifth of the frame budget.
    ExponentialDecay {
        start: f64,
        min: f64,
        #[serde(default)]
        time_constant: Option<f64>,
    },
}

impl EpsilonSchedule {
    pub fn decaying() -> Self {
        EpsilonSchedule::ExponentialDecay { start: 1.0, min: 0.01, time_constant: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSchedule {
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon_schedule: EpsilonSchedule,
    pub alpha_schedule: AlphaSchedule,
    pub q_init: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 0.1,
            gamma: 0.9,
            epsilon: 0.1,
            epsilon_schedule: EpsilonSchedule::Constant,
            alpha_schedule: AlphaSchedule::Constant,
            q_init: 0.0,
        }
    }
}

impl Hyperparams {
    pub fn with_alpha(alpha: f64) -> Self {
        Hyperparams { alpha, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| Err(Error::InvalidConfig { path: path.into(), message });
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("{} not in (0, 1]", self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma", format!("{} not in (0, 1)", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon", format!("{} not in [0, 1]", self.epsilon));
        }
        if let EpsilonSchedule::ExponentialDecay { start, min, time_constant } = self.epsilon_schedule {
            if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&min) {
                return bad("epsilon_schedule", "start and min must lie in [0, 1]".into());
            }
            if time_constant.is_some_and(|tc| tc <= 0.0) {
                return bad("epsilon_schedule.time_constant", "must be positive".into());
            }
        }
        if !self.q_init.is_finite() {
            return bad("q_init", "must be finite".into());
        }
        Ok(())
    }

    /// Exploration rate at global frame `t` of a run with `budget` frames.
    pub fn epsilon_at(&self, t: u64, budget: u64) -> f64 {
        match self.epsilon_schedule {
            EpsilonSchedule::Constant => self.epsilon,
            EpsilonSchedule::ExponentialDecay { start, min, time_constant } => {
                let tc = time_constant.unwrap_or((budget as f64 / 5.0).max(1.0));
                (start * (-(t as f64) / tc).exp()).max(min)
            }
        }
    }
}

/// A learner's complete state. Double Q keeps its second table in `secondary`.
#[derive(Clone, Debug, PartialEq)]
pub struct Learner {
    pub algorithm: Algorithm,
    pub primary: QTable,
    pub secondary: Option<QTable>,
    /// SARSA's already-chosen next action.
    pub pending_action: Option<usize>,
    pub frames: u64,
}

impl Learner {
    pub fn new(algorithm: Algorithm, n_states: usize, n_actions: usize, init: f64) -> Self {
        let table = QTable::new(n_states, n_actions, init);
        let secondary = (algorithm == Algorithm::DoubleQ).then(|| table.clone());
        Learner { algorithm, primary: table, secondary, pending_action: None, frames: 0 }
    }

    /// The table greedy decisions are made on (`Q_A + Q_B` for Double Q).
    pub fn decision_table(&self) -> QTable {
        match &self.secondary {
            Some(b) => self.primary.elementwise_sum(b),
            None => self.primary.clone(),
        }
    }

    pub fn behavior_action<R: Rng + ?Sized>(&self, s: usize, epsilon: f64, rng: &mut R) -> usize {
        match &self.secondary {
            None => eps_greedy(&self.primary, s, epsilon, rng),
            Some(b) => {
                let n = self.primary.n_actions();
                let mut sum = [0.0f64; 4];
                for (i, v) in sum.iter_mut().enumerate().take(n) {
                    *v = self.primary.get(s, i) + b.get(s, i);
                }
                eps_greedy_row(&sum[..n], epsilon, rng)
            }
        }
    }
}

/// Behaviour action for an arbitrary learner (see [`Learner::behavior_action`]).
pub fn behavior_action<R: Rng + ?Sized>(learner: &Learner, s: usize, epsilon: f64, rng: &mut R) -> usize {
    learner.behavior_action(s, epsilon, rng)
}

/// Resumable training loop over back-to-back episodes.
pub struct Trainer<'e, R> {
    env: &'e Env,
    hyper: Hyperparams,
    budget: u64,
    learner: Learner,
    position: Position,
    rng: R,
}

impl<'e, R: Rng> Trainer<'e, R> {
    pub fn new(env: &'e Env, algorithm: Algorithm, hyper: Hyperparams, budget: u64, rng: R) -> Self {
        let learner = Learner::new(algorithm, env.n_states(), env.n_actions(), hyper.q_init);
        Trainer { env, hyper, budget, learner, position: env.reset().position, rng }
    }

    pub fn learner(&self) -> &Learner {
        &self.learner
    }

    pub fn into_learner(self) -> Learner {
        self.learner
    }

    /// Runs frames until the learner has seen `frame` frames in total
    /// (clamped to the budget).
    pub fn run_until(&mut self, frame: u64) {
        let end = frame.min(self.budget);
        while self.learner.frames < end {
            self.frame();
        }
    }

    fn frame(&mut self) {
        let env = self.env;
        let from = match self.position {
            Position::Cell(c) => c,
            Position::Absorbed => unreachable!("position is reset on absorption"),
        };
        let s = env.state_index(from);
        let eps = self.hyper.epsilon_at(self.learner.frames, self.budget);
        let (alpha, gamma) = (self.hyper.alpha, self.hyper.gamma);
        let learner = &mut self.learner;
        let rng = &mut self.rng;

        let a = match learner.pending_action.take() {
            Some(a) => a,
            None => learner.behavior_action(s, eps, rng),
        };
        let next_pos = env.advance(from, a, rng, |_| {});
        let spec = env.spec();
        let (r, next) = match next_pos {
            Position::Cell(c) => (spec.r_tick as f64, Some(env.state_index(c))),
            Position::Absorbed => ((spec.r_tick + spec.r_target) as f64, None),
        };
        match learner.algorithm {
            Algorithm::QLearning => q_update(&mut learner.primary, s, a, r, next, alpha, gamma),
            Algorithm::Sarsa => {
                let next_pair = next.map(|n| {
                    let eps_next = self.hyper.epsilon_at(learner.frames + 1, self.budget);
                    let a_next = eps_greedy(&learner.primary, n, eps_next, rng);
                    learner.pending_action = Some(a_next);
                    (n, a_next)
                });
                sarsa_update(&mut learner.primary, s, a, r, next_pair, alpha, gamma);
            }
            Algorithm::ExpectedSarsa => expected_sarsa_update(&mut learner.primary, s, a, r, next, alpha, gamma, eps),
            Algorithm::DoubleQ => {
                let qb = learner.secondary.as_mut().expect("double Q learner has two tables");
                double_q_update(&mut learner.primary, qb, s, a, r, next, alpha, gamma, rng);
            }
        }
        learner.frames += 1;
        self.position = match next_pos {
            Position::Absorbed => env.reset().position,
            p => p,
        };
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub learner: Learner,
    /// `(frame, learner)` value copies taken at the requested frames.
    pub snapshots: Vec<(u64, Learner)>,
}

pub fn train<R: Rng>(
    env: &Env,
    algorithm: Algorithm,
    hyper: &Hyperparams,
    frame_budget: u64,
    checkpoints: &[u64],
    rng: R,
) -> TrainOutput {
    assert!(frame_budget >= 1, "frame budget must be positive");
    let mut trainer = Trainer::new(env, algorithm, *hyper, frame_budget, rng);
    let mut marks: Vec<u64> = checkpoints.iter().copied().filter(|&c| c <= frame_budget).collect();
    marks.sort_unstable();
    marks.dedup();
    let mut snapshots = Vec::with_capacity(marks.len());
    for mark in marks {
        trainer.run_until(mark);
        snapshots.push((mark, trainer.learner().clone()));
    }
    trainer.run_until(frame_budget);
    TrainOutput { learner: trainer.into_learner(), snapshots }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::seed::seed_stream;

    fn table(rows: &[&[f64]]) -> QTable {
        let mut q = QTable::new(rows.len(), rows[0].len(), 0.0);
        for (s, r) in rows.iter().enumerate() {
            q.row_mut(s).copy_from_slice(r);
        }
        q
    }

    fn freq(n: usize, mut draw: impl FnMut() -> usize, k: usize) -> Vec<f64> {
        let mut c = vec![0usize; k];
        for _ in 0..n {
            c[draw()] += 1;
        }
        c.into_iter().map(|x| x as f64 / n as f64).collect()
    }

    fn within_3_sigma(f: f64, p: f64, n: usize) -> bool {
        (f - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn greedy_and_exploratory_choices() {
        let mut rng = seed_stream(1, 0, "eps");
        let q = table(&[&[1.0, 3.0], &[2.0, 2.0]]);
        assert_eq!(eps_greedy(&q, 0, 0.0, &mut rng), 1);

        let n = 100_000;
        for f in freq(n, || eps_greedy(&q, 0, 1.0, &mut rng), 2) {
            assert!(within_3_sigma(f, 0.5, n));
        }
        for f in freq(n, || eps_greedy(&q, 1, 0.0, &mut rng), 2) {
            assert!(within_3_sigma(f, 0.5, n));
        }
        let q4 = table(&[&[0.0, 5.0, 5.0, 5.0]]);
        for (i, f) in freq(n, || eps_greedy(&q4, 0, 0.0, &mut rng), 4).into_iter().enumerate() {
            assert!(within_3_sigma(f, if i == 0 { 0.0 } else { 1.0 / 3.0 }, n) || (i == 0 && f == 0.0));
        }
    }

    #[test]
    fn q_update_arithmetic() {
        let mut q = QTable::new(2, 2, 0.0);
        q_update(&mut q, 0, 1, -1.0, Some(1), 0.1, 0.9);
        assert!((q.get(0, 1) + 0.1).abs() < 1e-15);

        let mut q = table(&[&[7.0, -3.0], &[4.0, 2.0]]);
        q_update(&mut q, 0, 0, -1.0, Some(1), 1.0, 0.9);
        assert!((q.get(0, 0) - (-1.0 + 0.9 * 4.0)).abs() < 1e-12);
        q_update(&mut q, 0, 1, 99.0, None, 1.0, 0.9);
        assert_eq!(q.get(0, 1), 99.0);
    }

    #[test]
    fn repeated_constant_target_follows_closed_form() {
        // Q_{n+1} = (1-a)^n Q_1 + (1 - (1-a)^n) * target
        let (alpha, target, q1) = (0.3, -4.0, 2.5);
        let mut q = QTable::new(1, 1, q1);
        for n in 1..=40u32 {
            q_update(&mut q, 0, 0, target, None, alpha, 0.9);
            let decay = (1.0f64 - alpha).powi(n as i32);
            let expected = decay * q1 + (1.0 - decay) * target;
            assert!((q.get(0, 0) - expected).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn sarsa_update_arithmetic() {
        let mut q = QTable::new(2, 2, 0.0);
        sarsa_update(&mut q, 0, 0, 99.0, None, 0.1, 0.9);
        assert!((q.get(0, 0) - 9.9).abs() < 1e-12);

        let mut q = table(&[&[5.0, 0.0], &[0.0, 5.0]]);
        sarsa_update(&mut q, 0, 0, -1.0, Some((1, 1)), 0.1, 0.9);
        assert!((q.get(0, 0) - 4.85).abs() < 1e-12);
    }

    #[test]
    fn greedy_sarsa_and_expected_sarsa_coincide_with_q_learning() {
        let base = table(&[&[0.3, -1.2], &[-0.5, 2.0]]);
        let mut q = base.clone();
        let mut sarsa = base.clone();
        let mut expected = base.clone();
        q_update(&mut q, 0, 1, -1.0, Some(1), 0.2, 0.9);
        sarsa_update(&mut sarsa, 0, 1, -1.0, Some((1, base.argmax(1))), 0.2, 0.9);
        expected_sarsa_update(&mut expected, 0, 1, -1.0, Some(1), 0.2, 0.9, 0.0);
        assert_eq!(q, sarsa);
        assert_eq!(q, expected);
    }

    #[test]
    fn expected_sarsa_expectations() {
        assert!((eps_greedy_expectation(&[0.0, 10.0], 0.1) - 9.5).abs() < 1e-12);
        assert!((eps_greedy_expectation(&[1.0, 2.0, 6.0, 3.0], 1.0) - 3.0).abs() < 1e-12);
        assert_eq!(eps_greedy_expectation(&[4.0, 4.0], 0.3), 4.0);
        // Greedy mass split among tied maxima.
        assert!((eps_greedy_expectation(&[1.0, 5.0, 5.0, 0.0], 0.2) - (0.05 * 11.0 + 0.8 * 5.0)).abs() < 1e-12);
    }

    #[test]
    fn double_q_branches_are_fair_and_collapse_to_q_learning() {
        let mut rng = seed_stream(5, 0, "dq");
        let n = 100_000;
        let mut a_count = 0;
        let base = table(&[&[0.5, 0.1], &[1.0, -2.0]]);
        let mut mean_a = 0.0;
        let mut mean_b = 0.0;
        for _ in 0..n {
            let (mut qa, mut qb) = (base.clone(), base.clone());
            match double_q_update(&mut qa, &mut qb, 0, 0, -1.0, Some(1), 0.5, 0.9, &mut rng) {
                DoubleBranch::A => {
                    a_count += 1;
                    mean_a += qa.get(0, 0);
                    assert_eq!(qb, base);
                }
                DoubleBranch::B => {
                    mean_b += qb.get(0, 0);
                    assert_eq!(qa, base);
                }
            }
        }
        assert!(within_3_sigma(a_count as f64 / n as f64, 0.5, n));
        let mut q = base.clone();
        q_update(&mut q, 0, 0, -1.0, Some(1), 0.5, 0.9);
        assert!((mean_a / a_count as f64 - q.get(0, 0)).abs() < 1e-12);
        assert!((mean_b / (n - a_count) as f64 - q.get(0, 0)).abs() < 1e-12);

        // Terminal: the updated entry moves toward r whatever the other table holds.
        let mut qa = table(&[&[0.0, 0.0]]);
        let mut qb = table(&[&[1e6, -1e6]]);
        let branch = double_q_update(&mut qa, &mut qb, 0, 1, 10.0, None, 0.5, 0.9, &mut rng);
        let moved = if branch == DoubleBranch::A { qa.get(0, 1) } else { qb.get(0, 1) };
        assert_eq!(moved, if branch == DoubleBranch::A { 5.0 } else { -1e6 + 0.5 * (10.0 + 1e6) });
    }

    #[test]
    fn double_q_behaviour_uses_table_sum() {
        let mut rng = seed_stream(2, 0, "beh");
        let mut l = Learner::new(Algorithm::DoubleQ, 1, 2, 0.0);
        l.primary.row_mut(0).copy_from_slice(&[1.0, 0.0]);
        l.secondary.as_mut().unwrap().row_mut(0).copy_from_slice(&[0.0, 2.0]);
        assert_eq!(l.behavior_action(0, 0.0, &mut rng), 1);

        let mut single = Learner::new(Algorithm::QLearning, 1, 2, 0.0);
        single.primary.row_mut(0).copy_from_slice(&[0.2, -0.1]);
        let mut r1 = seed_stream(3, 0, "x");
        let mut r2 = seed_stream(3, 0, "x");
        for _ in 0..100 {
            assert_eq!(single.behavior_action(0, 0.4, &mut r1), eps_greedy(&single.primary, 0, 0.4, &mut r2));
        }
        let mut scaled = l.clone();
        for v in scaled.primary.row_mut(0) {
            *v *= 3.5;
        }
        for v in scaled.secondary.as_mut().unwrap().row_mut(0) {
            *v *= 3.5;
        }
        assert_eq!(scaled.behavior_action(0, 0.0, &mut rng), 1);
    }

    #[test]
    fn two_state_chain_converges_to_analytic_fixed_point() {
        // Self-looping state with reward r forever: Q* = r / (1 - gamma).
        let (r, gamma) = (-1.0, 0.9);
        let mut q = QTable::new(2, 1, 0.0);
        for _ in 0..2000 {
            q_update(&mut q, 0, 0, r, Some(1), 0.5, gamma);
            q_update(&mut q, 1, 0, r, Some(0), 0.5, gamma);
        }
        assert!((q.get(0, 0) - r / (1.0 - gamma)).abs() < 1e-6);
        assert!((q.get(1, 0) - r / (1.0 - gamma)).abs() < 1e-6);
    }

    #[test]
    fn frame_budget_is_exact_and_snapshots_are_copies() {
        let env = Env::new(catalog::grid2d_l(2)).unwrap();
        for alg in Algorithm::ALL {
            let out = train(&env, alg, &Hyperparams::default(), 1, &[], seed_stream(0, 0, "t"));
            assert_eq!(out.learner.frames, 1);
            let changed = out.learner.primary.values().iter().filter(|&&v| v != 0.0).count()
                + out.learner.secondary.as_ref().map_or(0, |b| b.values().iter().filter(|&&v| v != 0.0).count());
            assert_eq!(changed, 1, "{alg}");
        }
        let out = train(&env, Algorithm::QLearning, &Hyperparams::default(), 5000, &[100, 1000], seed_stream(1, 0, "t"));
        assert_eq!(out.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(), vec![100, 1000]);
        assert_eq!(out.snapshots[0].1.frames, 100);
        assert_ne!(out.snapshots[0].1.primary, out.learner.primary);
        let again = train(&env, Algorithm::QLearning, &Hyperparams::default(), 100, &[], seed_stream(1, 0, "t"));
        assert_eq!(again.learner, out.snapshots[0].1);
    }

    #[test]
    fn epsilon_decay_schedule() {
        let h = Hyperparams { epsilon_schedule: EpsilonSchedule::decaying(), ..Default::default() };
        assert_eq!(h.epsilon_at(0, 1000), 1.0);
        assert!((h.epsilon_at(200, 1000) - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(h.epsilon_at(1_000_000, 1000), 0.01);
        assert_eq!(Hyperparams::default().epsilon_at(123, 1000), 0.1);
    }

    #[test]
    fn hyperparameter_validation() {
        assert!(Hyperparams::default().validate().is_ok());
        assert!(Hyperparams::with_alpha(0.0).validate().is_err());
        assert!(Hyperparams { gamma: 1.0, ..Default::default() }.validate().is_err());
        assert!(Hyperparams { epsilon: 1.5, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn qtable_csv_round_trip_and_errors() {
        let q = table(&[&[0.5, -1.25], &[3.0, 1e-9]]);
        assert_eq!(QTable::from_csv(&q.to_csv()).unwrap(), q);
        assert!(QTable::from_csv("state,action,value\n0,0,1\n0,1\n").is_err());
        assert!(QTable::from_csv("state,action,value\n0,0,1\n1,1,2\n").is_err());
        assert!(QTable::from_csv("state,action,value\n0,0,NaN\n").is_err());
    }
}
