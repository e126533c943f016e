//! Evaluation of trained agents and fixed policies.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{Cell, Env, GridSpec, Position, LEFT, RIGHT};
use crate::error::{Error, Result};
use crate::markov;
use crate::seed::seed_stream;
use crate::td::{first_argmax, Learner};

/// Failed-agent cutoff used throughout the 2D experiments.
pub const DEFAULT_CUTOFF: u64 = 500;
/// Hard cap for "uncapped" Monte Carlo rollouts; reaching it is an anomaly.
pub const MC_HARD_CAP: u64 = 1_000_000;

/// Deterministic state -> action map, indexed by dense cell index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Policy {
    pub n_actions: usize,
    pub actions: Vec<usize>,
}

impl Policy {
    pub fn constant(n_states: usize, n_actions: usize, action: usize) -> Self {
        Policy { n_actions, actions: vec![action; n_states] }
    }

    #[inline]
    pub fn action(&self, s: usize) -> usize {
        self.actions[s]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,action\n");
        for (s, a) in self.actions.iter().enumerate() {
            out.push_str(&format!("{s},{a}\n"));
        }
        out
    }
}

/// Greedy policy; ties go to the lowest action index. Double Q uses `Q_A + Q_B`.
pub fn greedy_policy(learner: &Learner) -> Policy {
    let table = learner.decision_table();
    let actions = (0..table.n_states()).map(|s| first_argmax(table.row(s))).collect();
    Policy { n_actions: table.n_actions(), actions }
}

/// The 1D threshold family. Cells with index `> center - k - 1` go right,
/// the rest go left: `k = -1` is pi_L, `k = 0` pi_R, `k = 1` pi_RR, `k = 2` pi_RRR.
pub fn threshold_policy_1d(k: i32, spec: &GridSpec) -> Policy {
    assert_eq!(spec.dims, 1, "threshold policies are defined on intervals");
    let cutoff = spec.center() - k - 1;
    let actions = (0..spec.width() as i32).map(|i| if i > cutoff { RIGHT } else { LEFT }).collect();
    Policy { n_actions: 2, actions }
}

/// Conventional name of a threshold policy (`pi_L`, `pi_R`, `pi_RR`, ...).
pub fn threshold_name(k: i32) -> String {
    if k < 0 {
        "pi_L".into()
    } else {
        format!("pi_{}", "R".repeat(k as usize + 1))
    }
}

/// Classifies a 1D policy by the first left-going cell at or below the center.
/// Returns `None` when the left half is not of threshold form.
pub fn classify_threshold(policy: &Policy, spec: &GridSpec) -> Option<i32> {
    let c = spec.center();
    let mut k = -1;
    while k < c && policy.action((c - k - 1) as usize) == RIGHT {
        k += 1;
    }
    let left_ok = (0..=c - k - 1).all(|i| policy.action(i as usize) == LEFT);
    left_ok.then_some(k)
}

/// Frames needed by the best noiseless route (every cell treated as cold).
pub fn noiseless_shortest_path(spec: &GridSpec) -> Option<u64> {
    let mut cold = spec.clone();
    cold.temperature.iter_mut().for_each(|t| *t = 0);
    cold.drift.iter_mut().for_each(|p| *p = 0.0);
    let env = Env::new(cold).ok()?;
    let mut dist = vec![u64::MAX; spec.n_cells()];
    let mut queue = std::collections::VecDeque::from([spec.start]);
    dist[spec.index(spec.start)] = 0;
    let mut rng = seed_stream(0, 0, "bfs");
    while let Some(c) = queue.pop_front() {
        let d = dist[spec.index(c)];
        for a in 0..spec.n_actions() {
            match env.advance(c, a, &mut rng, |_| {}) {
                Position::Absorbed => return Some(d + 1),
                Position::Cell(n) => {
                    if dist[spec.index(n)] == u64::MAX {
                        dist[spec.index(n)] = d + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub length: u64,
    /// Start cell followed by every in-grid cell reached by a micro-move.
    pub trail: Vec<Cell>,
    pub done: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct RolloutSummary {
    length: u64,
    done: bool,
    /// Highest temperature among visited cells.
    hottest: u32,
}

fn run_policy<R: Rng + ?Sized>(
    policy: &Policy,
    env: &Env,
    cutoff: u64,
    rng: &mut R,
    mut visit: impl FnMut(Cell),
) -> RolloutSummary {
    let spec = env.spec();
    let mut pos = spec.start;
    visit(pos);
    let mut hottest = spec.temperature_at(pos);
    let mut frames = 0;
    while frames < cutoff {
        let a = policy.action(env.state_index(pos));
        let next = env.advance(pos, a, rng, |c| {
            if spec.in_bounds(c) {
                hottest = hottest.max(spec.temperature_at(c));
                visit(c);
            }
        });
        frames += 1;
        match next {
            Position::Absorbed => return RolloutSummary { length: frames, done: true, hottest },
            Position::Cell(c) => pos = c,
        }
    }
    RolloutSummary { length: frames, done: false, hottest }
}

/// Runs `policy` greedily until absorption or `cutoff` frames.
pub fn rollout<R: Rng + ?Sized>(policy: &Policy, env: &Env, cutoff: u64, rng: &mut R) -> Episode {
    assert!(cutoff >= 1, "cutoff must be positive");
    let mut trail = Vec::new();
    let s = run_policy(policy, env, cutoff, rng, |c| trail.push(c));
    Episode { length: s.length, trail, done: s.done }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteCounts {
    pub heated: u64,
    pub deterministic: u64,
    /// Successful rollouts keyed by the highest temperature they visited.
    pub by_hottest: BTreeMap<u32, u64>,
}

impl RouteCounts {
    fn record(&mut self, hottest: u32) {
        if hottest > 0 {
            self.heated += 1;
        } else {
            self.deterministic += 1;
        }
        *self.by_hottest.entry(hottest).or_insert(0) += 1;
    }

    fn merge(&mut self, other: RouteCounts) {
        self.heated += other.heated;
        self.deterministic += other.deterministic;
        for (t, n) in other.by_hottest {
            *self.by_hottest.entry(t).or_insert(0) += n;
        }
    }
}

/// First-passage statistics over a set of rollouts. `mfpt` and `std` cover
/// successful rollouts only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FptStats {
    pub samples: Vec<u64>,
    pub failed_count: u64,
    pub mfpt: f64,
    pub std: f64,
    pub route_counts: RouteCounts,
}

impl FptStats {
    pub fn from_samples(samples: Vec<u64>, failed_count: u64, route_counts: RouteCounts) -> Self {
        let (mfpt, std) = mean_std(&samples);
        FptStats { samples, failed_count, mfpt, std, route_counts }
    }

    pub fn total(&self) -> u64 {
        self.samples.len() as u64 + self.failed_count
    }

    pub fn failed_fraction(&self) -> f64 {
        ratio(self.failed_count, self.total())
    }

    /// Share of successful rollouts that went through a heated cell.
    pub fn heated_fraction(&self) -> f64 {
        ratio(self.route_counts.heated, self.samples.len() as u64)
    }

    pub fn standard_error(&self) -> f64 {
        if self.samples.is_empty() {
            f64::NAN
        } else {
            self.std / (self.samples.len() as f64).sqrt()
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

/// Mean and population standard deviation, computed from exact integer sums.
pub fn mean_std(samples: &[u64]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = samples.len() as u128;
    let sum: u128 = samples.iter().map(|&x| x as u128).sum();
    let sum_sq: u128 = samples.iter().map(|&x| (x as u128) * (x as u128)).sum();
    let mean = sum as f64 / n as f64;
    // n * sum_sq - sum^2 is exact in integers.
    let var = (n * sum_sq - sum * sum) as f64 / (n * n) as f64;
    (mean, var.max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub cutoff: u64,
    pub rollouts_per_agent: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { cutoff: DEFAULT_CUTOFF, rollouts_per_agent: 1 }
    }
}

/// Greedy rollouts of every agent's policy, aggregated. Agent `i` draws from
/// `seed_stream(seed, i, "eval")`, so the result is schedule-independent.
pub fn evaluate_population(policies: &[Policy], env: &Env, config: &EvalConfig, seed: u64) -> FptStats {
    let per_agent: Vec<(Vec<u64>, u64, RouteCounts)> = policies
        .par_iter()
        .enumerate()
        .map(|(i, policy)| {
            let mut rng = seed_stream(seed, i as u64, "eval");
            let mut lengths = Vec::with_capacity(config.rollouts_per_agent);
            let mut failed = 0;
            let mut routes = RouteCounts::default();
            for _ in 0..config.rollouts_per_agent {
                let r = run_policy(policy, env, config.cutoff, &mut rng, |_| {});
                if r.done {
                    lengths.push(r.length);
                    routes.record(r.hottest);
                } else {
                    failed += 1;
                }
            }
            (lengths, failed, routes)
        })
        .collect();
    let mut samples = Vec::new();
    let mut failed = 0;
    let mut routes = RouteCounts::default();
    for (l, f, r) in per_agent {
        samples.extend(l);
        failed += f;
        routes.merge(r);
    }
    FptStats::from_samples(samples, failed, routes)
}

/// Per-state modal action and action frequencies over a population.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationPolicy {
    pub policy: Policy,
    /// `frequencies[s][a]` = share of agents choosing `a` in state `s`.
    pub frequencies: Vec<Vec<f64>>,
}

impl PopulationPolicy {
    /// Percentage of agents going right in a 1D cell.
    pub fn pct_right(&self, cell: usize) -> f64 {
        100.0 * self.frequencies[cell][RIGHT]
    }
}

pub fn most_common_policy(policies: &[Policy]) -> PopulationPolicy {
    assert!(!policies.is_empty(), "population must be non-empty");
    let n_states = policies[0].actions.len();
    let n_actions = policies[0].n_actions;
    let mut counts = vec![vec![0u64; n_actions]; n_states];
    for p in policies {
        for (s, &a) in p.actions.iter().enumerate() {
            counts[s][a] += 1;
        }
    }
    let n = policies.len() as f64;
    let actions = counts
        .iter()
        .map(|c| {
            let mut best = 0;
            for a in 1..n_actions {
                if c[a] > c[best] {
                    best = a;
                }
            }
            best
        })
        .collect();
    let frequencies = counts.iter().map(|c| c.iter().map(|&x| x as f64 / n).collect()).collect();
    PopulationPolicy { policy: Policy { n_actions, actions }, frequencies }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub n_runs: u64,
    pub mfpt: f64,
    pub std: f64,
    /// First-passage time -> count.
    pub histogram: BTreeMap<u64, u64>,
    /// Runs that hit [`MC_HARD_CAP`] (excluded from the moments).
    pub capped: u64,
}

impl McEstimate {
    pub fn standard_error(&self) -> f64 {
        self.std / ((self.n_runs - self.capped) as f64).sqrt()
    }
}

const MC_CHUNK: u64 = 10_000;

/// Monte Carlo first-passage statistics of a fixed policy from the start cell.
pub fn mc_policy_mfpt(policy: &Policy, env: &Env, n_runs: u64, seed: u64) -> McEstimate {
    assert!(n_runs > 0, "need at least one run");
    let chunks = n_runs.div_ceil(MC_CHUNK);
    let parts: Vec<(BTreeMap<u64, u64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed_stream(seed, c, "mc");
            let runs = MC_CHUNK.min(n_runs - c * MC_CHUNK);
            let mut hist = BTreeMap::new();
            let mut capped = 0;
            for _ in 0..runs {
                let r = run_policy(policy, env, MC_HARD_CAP, &mut rng, |_| {});
                if r.done {
                    *hist.entry(r.length).or_insert(0) += 1;
                } else {
                    capped += 1;
                }
            }
            (hist, capped)
        })
        .collect();
    let mut histogram = BTreeMap::new();
    let mut capped = 0;
    for (h, c) in parts {
        for (k, v) in h {
            *histogram.entry(k).or_insert(0) += v;
        }
        capped += c;
    }
    let (mfpt, std) = histogram_moments(&histogram);
    McEstimate { n_runs, mfpt, std, histogram, capped }
}

fn histogram_moments(h: &BTreeMap<u64, u64>) -> (f64, f64) {
    let n: u128 = h.values().map(|&c| c as u128).sum();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let sum: u128 = h.iter().map(|(&k, &c)| k as u128 * c as u128).sum();
    let sum_sq: u128 = h.iter().map(|(&k, &c)| (k as u128) * (k as u128) * c as u128).sum();
    let mean = sum as f64 / n as f64;
    let var = (n * sum_sq - sum * sum) as f64 / (n * n) as f64;
    (mean, var.max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MfptMethod {
    /// Absorbing-chain solution.
    Exact,
    MonteCarlo { n_runs: u64, seed: u64 },
}

/// Minimises MFPT over the threshold family; ties go to the smaller `k`.
/// Exact values within a relative `1e-9` count as ties, so rounding in the
/// chain solve cannot pick a policy that is only nominally faster.
pub fn best_threshold_policy(env: &Env, ks: impl IntoIterator<Item = i32>, method: MfptMethod) -> Result<(i32, f64)> {
    let spec = env.spec();
    if spec.dims != 1 {
        return Err(Error::Unsupported("threshold policy search on a 2D world".into()));
    }
    let mut best: Option<(i32, f64)> = None;
    for k in ks {
        let policy = threshold_policy_1d(k, spec);
        let mfpt = match method {
            MfptMethod::Exact => {
                let g = markov::build_transition_matrix(spec, &policy)?;
                markov::fundamental_mfpt(&g)?[spec.center() as usize]
            }
            MfptMethod::MonteCarlo { n_runs, seed } => mc_policy_mfpt(&policy, env, n_runs, seed).mfpt,
        };
        let tol = match method {
            MfptMethod::Exact => 1e-9,
            MfptMethod::MonteCarlo { .. } => 0.0,
        };
        if best.is_none_or(|(_, m)| mfpt < m * (1.0 - tol)) {
            best = Some((k, mfpt));
        }
    }
    best.ok_or_else(|| Error::InvalidConfig { path: "k_range".into(), message: "empty candidate set".into() })
}

/// Visit counts per grid cell, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityMap {
    pub width: usize,
    pub height: usize,
    pub counts: Vec<u64>,
}

impl DensityMap {
    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.counts[y * self.width + x]
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Rows from top (`y = height - 1`) to bottom, comma separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for y in (0..self.height).rev() {
            let row: Vec<String> = (0..self.width).map(|x| self.get(x, y).to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Summed visit counts of greedy rollouts over a population.
pub fn path_density(policies: &[Policy], env: &Env, n_rollouts: usize, cutoff: u64, seed: u64) -> DensityMap {
    let spec = env.spec();
    let (w, h) = (spec.width(), spec.height());
    let maps: Vec<Vec<u64>> = policies
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = seed_stream(seed, i as u64, "density");
            let mut counts = vec![0u64; w * h];
            for _ in 0..n_rollouts {
                run_policy(p, env, cutoff, &mut rng, |c| counts[spec.index(c)] += 1);
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; w * h];
    for m in maps {
        for (acc, v) in counts.iter_mut().zip(m) {
            *acc += v;
        }
    }
    DensityMap { width: w, height: h, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::env::Move;
    use crate::td::{Algorithm, QTable};

    /// Up the left edge, then right along the top: the deterministic route.
    fn cold_route_policy(spec: &GridSpec) -> Policy {
        let mut p = Policy::constant(spec.n_cells(), 4, 0);
        for x in 0..10 {
            p.actions[spec.index(Cell::new(x, 9))] = 1;
        }
        p
    }

    #[test]
    fn greedy_extraction_breaks_ties_by_index() {
        let mut l = Learner::new(Algorithm::QLearning, 3, 2, 0.0);
        for s in 0..3 {
            l.primary.row_mut(s).copy_from_slice(&[0.0, -1.0]);
        }
        assert_eq!(greedy_policy(&l).actions, vec![0, 0, 0]);

        let mut d = Learner::new(Algorithm::DoubleQ, 2, 2, 0.0);
        let mut single = QTable::new(2, 2, 0.0);
        single.row_mut(0).copy_from_slice(&[0.1, 0.4]);
        single.row_mut(1).copy_from_slice(&[-2.0, -3.0]);
        d.primary = single.clone();
        d.secondary = Some(single.clone());
        let mut q = Learner::new(Algorithm::QLearning, 2, 2, 0.0);
        q.primary = single;
        assert_eq!(greedy_policy(&d), greedy_policy(&q));
    }

    #[test]
    fn threshold_policies() {
        let spec = catalog::interval41(0, 0.0);
        let r = threshold_policy_1d(0, &spec);
        assert_eq!((r.action(20), r.action(19)), (RIGHT, LEFT));
        let l = threshold_policy_1d(-1, &spec);
        assert!((0..=20).all(|i| l.action(i) == LEFT));
        let rr = threshold_policy_1d(1, &spec);
        assert_eq!((rr.action(20), rr.action(19), rr.action(18)), (RIGHT, RIGHT, LEFT));
        for k in -1..4 {
            assert_eq!(classify_threshold(&threshold_policy_1d(k, &spec), &spec), Some(k));
        }
        assert_eq!(threshold_name(-1), "pi_L");
        assert_eq!(threshold_name(2), "pi_RRR");
    }

    #[test]
    fn deterministic_rollouts() {
        let env = Env::new(catalog::grid2d_l(0)).unwrap();
        let mut rng = seed_stream(0, 0, "r");
        let ep = rollout(&cold_route_policy(env.spec()), &env, 500, &mut rng);
        assert_eq!((ep.length, ep.done), (18, true));
        assert_eq!(ep.trail.len(), 19);

        // Up at (0,0), down at (0,1): a two-cell loop.
        let mut looping = Policy::constant(100, 4, 0);
        looping.actions[env.state_index(Cell::new(0, 1))] = 2;
        let ep = rollout(&looping, &env, 500, &mut rng);
        assert_eq!((ep.length, ep.done), (500, false));

        let line = Env::new(catalog::interval41(0, 0.0)).unwrap();
        let ep = rollout(&threshold_policy_1d(-1, line.spec()), &line, 500, &mut rng);
        assert_eq!((ep.length, ep.done), (21, true));
    }

    #[test]
    fn population_of_optimal_agents() {
        let env = Env::new(catalog::grid2d_l(3)).unwrap();
        let pop = vec![cold_route_policy(env.spec()); 50];
        let stats = evaluate_population(&pop, &env, &EvalConfig::default(), 9);
        assert_eq!(stats.failed_count, 0);
        assert_eq!((stats.mfpt, stats.std), (18.0, 0.0));
        assert_eq!((stats.route_counts.heated, stats.route_counts.deterministic), (0, 50));
        assert_eq!(stats.route_counts.by_hottest, BTreeMap::from([(0, 50)]));

        let density = path_density(&pop, &env, 1, 500, 1);
        let single = rollout(&pop[0], &env, 500, &mut seed_stream(0, 0, "x"));
        for y in 0..10 {
            for x in 0..10 {
                let on_path = single.trail.contains(&Cell::new(x, y));
                assert_eq!(density.get(x as usize, y as usize), if on_path { 50 } else { 0 });
            }
        }
    }

    #[test]
    fn population_partitions_and_determinism() {
        let env = Env::new(catalog::grid2d_l(3)).unwrap();
        let mut pop = vec![cold_route_policy(env.spec()); 10];
        // Right along the bottom, then up the right edge: heated route.
        let mut hot = Policy::constant(100, 4, 1);
        for y in 0..10 {
            hot.actions[env.state_index(Cell::new(9, y))] = 0;
        }
        pop.extend(std::iter::repeat_n(hot, 10));
        let cfg = EvalConfig { cutoff: 500, rollouts_per_agent: 3 };
        let stats = evaluate_population(&pop, &env, &cfg, 4);
        assert_eq!(stats.total(), 60);
        let successes = stats.samples.len() as u64;
        assert_eq!(stats.route_counts.heated + stats.route_counts.deterministic, successes);
        assert_eq!(stats.route_counts.deterministic, 30);
        assert_eq!(evaluate_population(&pop, &env, &cfg, 4), stats);
    }

    #[test]
    fn most_common_policy_counts() {
        let a = Policy { n_actions: 2, actions: vec![0, 1, 1] };
        let b = Policy { n_actions: 2, actions: vec![1, 1, 0] };
        let pop = most_common_policy(&[a.clone(), a.clone(), b]);
        assert_eq!(pop.policy, a);
        assert!((pop.frequencies[0][0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(pop.pct_right(1), 100.0);

        let same = most_common_policy(&vec![a.clone(); 4]);
        assert_eq!(same.policy, a);
        assert!(same.frequencies.iter().zip(&a.actions).all(|(f, &act)| f[act] == 1.0));
    }

    #[test]
    fn mc_left_policy_is_deterministic() {
        for t in [0, 3, 7] {
            let env = Env::new(catalog::interval41(t, 0.0)).unwrap();
            let est = mc_policy_mfpt(&threshold_policy_1d(-1, env.spec()), &env, 2000, 1);
            assert_eq!((est.mfpt, est.std, est.capped), (21.0, 0.0, 0));
            assert_eq!(est.histogram, BTreeMap::from([(21, 2000)]));
        }
    }

    #[test]
    fn best_threshold_on_cold_interval_is_a_tie_resolved_to_smaller_k() {
        let env = Env::new(catalog::interval41(0, 0.0)).unwrap();
        let (k, m) = best_threshold_policy(&env, -1..=2, MfptMethod::Exact).unwrap();
        assert_eq!(k, -1);
        assert!((m - 21.0).abs() < 1e-9);
        let two_d = Env::new(catalog::grid2d_l(0)).unwrap();
        assert!(best_threshold_policy(&two_d, 0..1, MfptMethod::Exact).is_err());
    }

    #[test]
    fn exact_ties_resolve_to_smaller_k() {
        // At T=2 every threshold policy has MFPT exactly 21.
        let env = Env::new(catalog::interval41(2, 0.0)).unwrap();
        let (k, m) = best_threshold_policy(&env, -1..=3, MfptMethod::Exact).unwrap();
        assert_eq!(k, -1);
        assert!((m - 21.0).abs() < 1e-9);
    }

    #[test]
    fn drift_makes_right_start_suboptimal() {
        let env = Env::new(catalog::interval41_drift(3, 0.3)).unwrap();
        let (k, _) = best_threshold_policy(&env, [-1, 0], MfptMethod::Exact).unwrap();
        assert_eq!(k, -1);
    }

    #[test]
    fn shortest_paths() {
        assert_eq!(noiseless_shortest_path(&catalog::grid2d_l(3)), Some(18));
        assert_eq!(noiseless_shortest_path(&catalog::interval41(5, 0.0)), Some(21));
        assert_eq!(noiseless_shortest_path(&catalog::uniform_interval(2, 2)), Some(3));
    }

    #[test]
    fn mean_std_is_exact() {
        assert_eq!(mean_std(&[18, 18, 18]), (18.0, 0.0));
        let (m, s) = mean_std(&[1, 2, 3, 4]);
        assert_eq!(m, 2.5);
        assert!((s - 1.25f64.sqrt()).abs() < 1e-15);
        let _ = Move::UP;
    }
}
