//! Exact absorbing-chain analysis of 1D heated intervals under fixed policies.
//!
//! States are ordered `0..N` (interval cells, i.e. `-ζ..=ζ`) followed by the
//! absorbing state `s_*` at index `N`. Rows are next-state distributions.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::env::{Absorption, DriftOrder, GridSpec};
use crate::error::{Error, Result};
use crate::eval::Policy;

/// Residual survival at which infinite sums are truncated.
pub const RESIDUAL_TOL: f64 = 1e-12;
const MAX_HORIZON: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    g: DMatrix<f64>,
}

impl TransitionMatrix {
    /// Wraps a matrix after checking it is row-stochastic with `s_*` last and absorbing.
    pub fn from_matrix(g: DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        if n < 2 || g.ncols() != n {
            return Err(Error::InvalidSpec(format!("transition matrix must be square with n >= 2, got {}x{}", n, g.ncols())));
        }
        for i in 0..n {
            let row = g.row(i);
            if row.iter().any(|&p| p.is_nan() || p < 0.0) {
                return Err(Error::InvalidSpec(format!("row {i} has a negative or NaN entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSpec(format!("row {i} sums to {sum}")));
            }
        }
        if g[(n - 1, n - 1)] != 1.0 {
            return Err(Error::InvalidSpec("the last state must be absorbing".into()));
        }
        Ok(TransitionMatrix { g })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Number of interval states (the matrix has one more row).
    pub fn n_transient(&self) -> usize {
        self.g.nrows() - 1
    }

    /// The transient block `Ḡ`.
    pub fn interior(&self) -> DMatrix<f64> {
        let n = self.n_transient();
        self.g.view((0, 0), (n, n)).into_owned()
    }

    /// One-frame absorption probability from each transient state.
    pub fn exit_column(&self) -> DVector<f64> {
        let n = self.n_transient();
        self.g.view((0, n), (n, 1)).column(0).into_owned()
    }

    pub fn to_csv(&self) -> String {
        matrix_to_csv(&self.g)
    }
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

enum MicroStep {
    Shift(i32),
    Drift(f64),
    Noise,
}

/// Exact next-state law from cell `i` as (interior pmf indexed by cell, absorbed mass).
fn row_law(spec: &GridSpec, i: usize, action: usize) -> (BTreeMap<i32, f64>, f64) {
    let width = spec.width() as i32;
    let first_crossing = spec.absorption == Absorption::FirstCrossing;
    let outside = |x: i32| x < 0 || x >= width;
    let t = spec.temperature[i];
    let p = spec.drift[i];

    let mut steps = vec![MicroStep::Shift(spec.actions()[action].dx)];
    if p > 0.0 && spec.drift_order == DriftOrder::AfterAction {
        steps.push(MicroStep::Drift(p));
    }
    steps.extend((0..t).map(|_| MicroStep::Noise));
    if p > 0.0 && spec.drift_order == DriftOrder::AfterNoise {
        steps.push(MicroStep::Drift(p));
    }

    let mut dist = BTreeMap::from([(i as i32, 1.0)]);
    let mut absorbed = 0.0;
    for step in steps {
        let mut next = BTreeMap::new();
        let mut add = |x: i32, m: f64| *next.entry(x).or_insert(0.0) += m;
        for (&x, &m) in &dist {
            match step {
                MicroStep::Shift(d) => add(x + d, m),
                MicroStep::Drift(p) => {
                    add(x - 1, m * p);
                    add(x, m * (1.0 - p));
                }
                MicroStep::Noise => {
                    add(x - 1, 0.5 * m);
                    add(x + 1, 0.5 * m);
                }
            }
        }
        if first_crossing {
            next.retain(|&x, m| {
                if outside(x) {
                    absorbed += *m;
                    false
                } else {
                    true
                }
            });
        }
        dist = next;
    }
    dist.retain(|&x, m| {
        if outside(x) {
            absorbed += *m;
            false
        } else {
            true
        }
    });
    (dist, absorbed)
}

/// Exact one-frame chain of a 1D spec under a fixed policy. Both absorption
/// semantics and drift orders are represented exactly.
pub fn build_transition_matrix(spec: &GridSpec, policy: &Policy) -> Result<TransitionMatrix> {
    if spec.dims != 1 {
        return Err(Error::Unsupported("exact chains are built for 1D intervals only".into()));
    }
    spec.validate()?;
    let n = spec.width();
    if policy.actions.len() != n || policy.n_actions != 2 {
        return Err(Error::InvalidSpec(format!("policy shape {}x{} does not match a {n}-cell interval", policy.actions.len(), policy.n_actions)));
    }
    let mut g = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        let (dist, absorbed) = row_law(spec, i, policy.action(i));
        for (x, m) in dist {
            g[(i, x as usize)] = m;
        }
        g[(i, n)] = absorbed;
        // Sums of dyadic masses are exact except under drift; renormalise the rounding.
        let sum: f64 = g.row(i).iter().sum();
        g.row_mut(i).scale_mut(1.0 / sum);
    }
    g[(n, n)] = 1.0;
    TransitionMatrix::from_matrix(g)
}

/// `survival[t]` for `t = 0..=t_max`: interior mass after `t` frames from `s0`.
pub fn survival_curve(chain: &TransitionMatrix, s0: usize, t_max: usize) -> Vec<f64> {
    let gbar_t = chain.interior().transpose();
    let mut v = DVector::zeros(chain.n_transient());
    v[s0] = 1.0;
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(1.0);
    for _ in 0..t_max {
        v = &gbar_t * v;
        out.push(v.sum());
    }
    out
}

pub fn survival_probability(chain: &TransitionMatrix, s0: usize, t: usize) -> f64 {
    survival_curve(chain, s0, t)[t]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub t_max: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Compares `Ḡ^t` against the top-left block of `G^t` for `t = 1..=t_max`.
/// Works on a raw matrix so corrupted fixtures can be checked too.
pub fn check_submatrix_lemma(g: &DMatrix<f64>, t_max: usize) -> LemmaReport {
    let n = g.nrows() - 1;
    let gbar = g.view((0, 0), (n, n)).into_owned();
    let mut full = g.clone();
    let mut sub = gbar.clone();
    let mut max_deviation: f64 = 0.0;
    for t in 1..=t_max {
        if t > 1 {
            full = &full * g;
            sub = &sub * &gbar;
        }
        let block = full.view((0, 0), (n, n));
        let dev = (block - &sub).abs().max();
        max_deviation = max_deviation.max(dev);
    }
    LemmaReport { t_max, max_deviation, passed: max_deviation <= 1e-10 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalBound {
    pub tau: u64,
    pub bound: f64,
}

/// `τ = floor(ζ/(w-1)) + 1` and `1 - 2^(-wτ)`.
pub fn survival_upper_bound(zeta: u64, w: u32) -> Result<SurvivalBound> {
    if w <= 1 {
        return Err(Error::HypothesisNotMet(format!("survival bound needs w > 1, got w = {w}")));
    }
    let tau = zeta / (w as u64 - 1) + 1;
    Ok(SurvivalBound { tau, bound: 1.0 - 2f64.powi(-((w as u64 * tau) as i32)) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub w: u32,
    pub bound: SurvivalBound,
    /// Largest survival at `τ` over all start states.
    pub worst_survival: f64,
    pub holds: bool,
}

/// Checks the survival bound at `τ` from every start state. The spec must
/// satisfy the bound's hypotheses: final-position absorption, no drift and
/// temperature `>= w > 1` everywhere (`w` is taken as the minimum temperature).
pub fn check_survival_bound(spec: &GridSpec, policy: &Policy) -> Result<BoundCheck> {
    if spec.dims != 1 {
        return Err(Error::HypothesisNotMet("survival bound is stated for 1D intervals".into()));
    }
    if spec.absorption != Absorption::FinalPosition {
        return Err(Error::HypothesisNotMet("survival bound assumes final-position absorption".into()));
    }
    if spec.drift.iter().any(|&p| p > 0.0) {
        return Err(Error::HypothesisNotMet("survival bound assumes no drift".into()));
    }
    let w = spec.temperature.iter().copied().min().unwrap_or(0);
    if w <= 1 {
        return Err(Error::HypothesisNotMet(format!("survival bound needs every temperature >= w > 1, minimum is {w}")));
    }
    let bound = survival_upper_bound(spec.half_width() as u64, w)?;
    let chain = build_transition_matrix(spec, policy)?;
    let gbar_t = chain.interior().transpose();
    let n = chain.n_transient();
    // Survival at τ from every start: row sums of Ḡ^τ.
    let mut ones = DVector::from_element(n, 1.0);
    let gbar = gbar_t.transpose();
    for _ in 0..bound.tau {
        ones = &gbar * ones;
    }
    let worst_survival = ones.max();
    Ok(BoundCheck { w, bound, worst_survival, holds: worst_survival <= bound.bound + 1e-9 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub c: f64,
    pub sigma: f64,
    pub horizon: usize,
}

impl Envelope {
    pub fn at(&self, t: usize) -> f64 {
        self.c * self.sigma.powi(t as i32)
    }
}

/// Fits `survival(t) <= C σ^t`. `σ = ‖Ḡ^m‖^(1/m)` with the max-row-sum norm
/// (the largest survival after `m` frames over all starts), and `C` is the
/// smallest constant dominating the curve up to `m`. Sub-multiplicativity
/// extends the domination to every `t`.
pub fn geometric_envelope(chain: &TransitionMatrix, s0: usize, horizon: usize) -> Envelope {
    assert!(horizon >= 1, "horizon must be positive");
    let gbar = chain.interior();
    let mut rows = DVector::from_element(chain.n_transient(), 1.0);
    for _ in 0..horizon {
        rows = &gbar * rows;
    }
    let curve = survival_curve(chain, s0, horizon);
    // A chain that empties within the horizon admits any rate; σ = 0 only
    // works when nothing survives the first frame.
    let sigma = match rows.max().max(0.0).powf(1.0 / horizon as f64) {
        s if s > 0.0 => s,
        _ if curve.iter().skip(1).all(|&s| s == 0.0) => 0.0,
        _ => 0.5,
    };
    let c = curve
        .iter()
        .enumerate()
        .map(|(t, &s)| if s == 0.0 { 0.0 } else { s / sigma.powi(t as i32) })
        .fold(0.0, f64::max);
    Envelope { c, sigma, horizon }
}

/// Envelope that also enforces `σ < 1` when every cell has temperature `>= 2`.
pub fn checked_envelope(spec: &GridSpec, chain: &TransitionMatrix, s0: usize, horizon: usize) -> Result<Envelope> {
    let env = geometric_envelope(chain, s0, horizon);
    if spec.temperature.iter().all(|&t| t >= 2) && env.sigma >= 1.0 {
        return Err(Error::HypothesisNotMet(format!(
            "every temperature is >= 2 but the envelope rate is {} at horizon {horizon}",
            env.sigma
        )));
    }
    Ok(env)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardSummary {
    pub expected_reward: f64,
    pub mfpt: f64,
    /// Frames summed before the residual dropped below tolerance.
    pub horizon: u64,
    pub residual: f64,
}

/// Expected total reward `Σ_t (r_target + t·r_tick) P(D_t)` and MFPT from `s0`,
/// summed until the residual survival drops below [`RESIDUAL_TOL`].
pub fn expected_total_reward_exact(chain: &TransitionMatrix, r_tick: f64, r_target: f64, s0: usize) -> Result<RewardSummary> {
    let gbar_t = chain.interior().transpose();
    let exit = chain.exit_column();
    let mut v = DVector::zeros(chain.n_transient());
    v[s0] = 1.0;
    let (mut reward, mut weighted_t, mut absorbed) = (0.0, 0.0, 0.0);
    let mut residual = 1.0;
    let mut t = 0u64;
    while residual >= RESIDUAL_TOL {
        if t >= MAX_HORIZON {
            return Err(Error::NotConverged(t));
        }
        t += 1;
        let p_exit = v.dot(&exit);
        reward += (r_target + t as f64 * r_tick) * p_exit;
        weighted_t += t as f64 * p_exit;
        absorbed += p_exit;
        v = &gbar_t * v;
        residual = v.sum();
    }
    Ok(RewardSummary { expected_reward: reward, mfpt: weighted_t / absorbed, horizon: t, residual })
}

/// Mean first-passage time from every transient state, `(I - Ḡ)^{-1} 1`.
pub fn fundamental_mfpt(chain: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = chain.n_transient();
    let a = DMatrix::identity(n, n) - chain.interior();
    let m = a
        .lu()
        .solve(&DVector::from_element(n, 1.0))
        .ok_or_else(|| Error::HypothesisNotMet("some state never reaches the absorbing state".into()))?;
    if m.iter().any(|x| !x.is_finite() || *x < 1.0 - 1e-9) {
        return Err(Error::HypothesisNotMet("some state never reaches the absorbing state".into()));
    }
    Ok(m.iter().copied().collect())
}

/// Exact mean and standard deviation of the first-passage time from every
/// transient state: with `N = (I - Ḡ)^{-1}`, `m = N1` and `E[τ²] = 2Nm - m`.
pub fn fundamental_fpt_moments(chain: &TransitionMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let mean = fundamental_mfpt(chain)?;
    let n = chain.n_transient();
    let lu = (DMatrix::identity(n, n) - chain.interior()).lu();
    let m = DVector::from_vec(mean.clone());
    let u = lu.solve(&m).ok_or_else(|| Error::HypothesisNotMet("singular fundamental matrix".into()))?;
    let std = (0..n).map(|i| (2.0 * u[i] - m[i] - m[i] * m[i]).max(0.0).sqrt()).collect();
    Ok((mean, std))
}

/// Closing-bound check for the expected total reward.
///
/// With `P(D_t) <= C σ^(t-1)` the series is absolutely convergent and
/// `|E[R]| <= Σ_t |r_target - t| C σ^(t-1)`. The signed closed form
/// `C(r_target-1)/(1-σ) - Cσ/(1-σ)^2` bounds the series only where every
/// coefficient `r_target - t` is non-negative, so it is reported but not
/// required to hold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub expected_reward: f64,
    pub absolute_bound: f64,
    pub signed_bound: f64,
    pub absolute_holds: bool,
    pub signed_holds: bool,
}

pub fn theorem_check(summary: &RewardSummary, envelope: &Envelope, r_target: f64) -> TheoremCheck {
    let (c, s) = (envelope.c, envelope.sigma);
    let signed_bound = c * (r_target - 1.0) / (1.0 - s) - c * s / ((1.0 - s) * (1.0 - s));
    let mut absolute_bound = 0.0;
    let mut weight = c;
    let mut t = 1.0;
    loop {
        let term = (r_target - t).abs() * weight;
        absolute_bound += term;
        if t > r_target && (term <= 1e-16 * absolute_bound || weight == 0.0) {
            break;
        }
        weight *= s;
        t += 1.0;
    }
    let e = summary.expected_reward;
    TheoremCheck {
        expected_reward: e,
        absolute_bound,
        signed_bound,
        absolute_holds: s < 1.0 && e.abs() <= absolute_bound * (1.0 + 1e-9),
        signed_holds: s < 1.0 && e <= signed_bound + 1e-9,
    }
}

/// CSV with columns `t,survival,envelope`.
pub fn survival_csv(curve: &[f64], envelope: Option<&Envelope>) -> String {
    let mut out = String::from("t,survival,envelope\n");
    for (t, s) in curve.iter().enumerate() {
        let e = envelope.map(|e| format!("{:e}", e.at(t))).unwrap_or_default();
        out.push_str(&format!("{t},{s:e},{e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::env::{Cell, Env, Position, LEFT, RIGHT};
    use crate::eval::{mc_policy_mfpt, threshold_policy_1d};
    use crate::seed::seed_stream;
    use proptest::prelude::*;

    fn uniform(zeta: usize, w: u32) -> GridSpec {
        catalog::uniform_interval(zeta, w)
    }

    #[test]
    fn deterministic_right_exit() {
        let spec = uniform(1, 0);
        let chain = build_transition_matrix(&spec, &Policy::constant(3, 2, RIGHT)).unwrap();
        assert_eq!(chain.matrix()[(2, 3)], 1.0);
        assert_eq!(chain.matrix()[(0, 1)], 1.0);
        let curve = survival_curve(&chain, 0, 5);
        assert_eq!(curve, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn binomial_row_by_hand() {
        // ζ=2, T=2 everywhere. Policy right then T=2 noise from the center.
        let spec = uniform(2, 2);
        let chain = build_transition_matrix(&spec, &Policy::constant(5, 2, RIGHT)).unwrap();
        let g = chain.matrix();
        // From 2 (the center): 3 + {-2,0,2} -> 1 (1/4), 3 (1/2), 5 = outside (1/4).
        assert_eq!(g[(2, 1)], 0.25);
        assert_eq!(g[(2, 3)], 0.5);
        assert_eq!(g[(2, 5)], 0.25);
        // From 4: 5 + {-2,0,2}: 3 with 1/4, rest outside.
        assert_eq!(g[(4, 3)], 0.25);
        assert_eq!(g[(4, 5)], 0.75);
    }

    #[test]
    fn final_position_allows_return() {
        // From cell 0 going left with T=2: -1 then {-2,0,+2} -> only +1 stays.
        let spec = uniform(2, 2);
        let chain = build_transition_matrix(&spec, &Policy::constant(5, 2, LEFT)).unwrap();
        assert_eq!(chain.matrix()[(0, 1)], 0.25);
        let mut fc = spec.clone();
        fc.absorption = Absorption::FirstCrossing;
        let chain = build_transition_matrix(&fc, &Policy::constant(5, 2, LEFT)).unwrap();
        assert_eq!(chain.matrix()[(0, 5)], 1.0);
    }

    #[test]
    fn rejects_2d_and_bad_shapes() {
        let p = Policy::constant(100, 4, 0);
        assert!(matches!(build_transition_matrix(&catalog::grid2d_l(1), &p), Err(Error::Unsupported(_))));
        assert!(build_transition_matrix(&catalog::interval41(1, 0.0), &Policy::constant(40, 2, 0)).is_err());
    }

    #[test]
    fn rows_match_simulation() {
        // 10^6 frames per row for a handful of representative rows.
        for (spec, k) in [(catalog::interval41(3, 0.0), 1), (catalog::interval41_drift(3, 0.3), 0), (uniform(5, 2), 0)] {
            let env = Env::new(spec.clone()).unwrap();
            let policy = threshold_policy_1d(k, &spec);
            let chain = build_transition_matrix(&spec, &policy).unwrap();
            let n = chain.n_transient();
            for &i in &[0usize, n / 2, n / 2 + 1, n - 2, n - 1] {
                let mut rng = seed_stream(11, i as u64, "rows");
                let mut counts = vec![0u64; n + 1];
                let draws = 1_000_000u64;
                for _ in 0..draws {
                    match env.advance(Cell::at(i as i32), policy.action(i), &mut rng, |_| {}) {
                        Position::Absorbed => counts[n] += 1,
                        Position::Cell(c) => counts[c.x as usize] += 1,
                    }
                }
                for (j, &count) in counts.iter().enumerate() {
                    let p = chain.matrix()[(i, j)];
                    let freq = count as f64 / draws as f64;
                    let sd = (p * (1.0 - p) / draws as f64).sqrt();
                    assert!((freq - p).abs() <= 3.0 * sd + 1e-12, "row {i} col {j}: {freq} vs {p}");
                }
            }
        }
    }

    #[test]
    fn submatrix_lemma_and_negative_control() {
        let spec = catalog::interval41(3, 0.0);
        let chain = build_transition_matrix(&spec, &threshold_policy_1d(1, &spec)).unwrap();
        let report = check_submatrix_lemma(chain.matrix(), 200);
        assert!(report.passed, "{report:?}");

        // Letting the absorbing state leak back breaks the block structure.
        let mut leaky = chain.matrix().clone();
        let n = chain.n_transient();
        leaky[(n, n)] = 0.5;
        leaky[(n, n / 2)] = 0.5;
        assert!(!check_submatrix_lemma(&leaky, 10).passed);
        assert!(TransitionMatrix::from_matrix(leaky).is_err());
    }

    #[test]
    fn survival_bound_formula() {
        assert_eq!(survival_upper_bound(2, 2).unwrap(), SurvivalBound { tau: 3, bound: 63.0 / 64.0 });
        let b = survival_upper_bound(20, 2).unwrap();
        assert_eq!(b.tau, 21);
        assert_eq!(b.bound, 1.0 - 2f64.powi(-42));
        assert!(survival_upper_bound(3, 1).is_err());
    }

    #[test]
    fn survival_bound_holds_on_uniform_intervals() {
        for zeta in [2usize, 5, 10, 20] {
            let spec = uniform(zeta, 2);
            for k in -1..=zeta as i32 {
                let check = check_survival_bound(&spec, &threshold_policy_1d(k, &spec)).unwrap();
                assert!(check.holds, "zeta {zeta} k {k}: {check:?}");
            }
        }
        let half_heated = catalog::interval41(3, 0.0);
        assert!(matches!(
            check_survival_bound(&half_heated, &threshold_policy_1d(0, &half_heated)),
            Err(Error::HypothesisNotMet(_))
        ));
    }

    #[test]
    fn envelope_dominates_and_bounds_spectral_radius() {
        let spec = uniform(5, 2);
        let chain = build_transition_matrix(&spec, &threshold_policy_1d(0, &spec)).unwrap();
        let env = checked_envelope(&spec, &chain, 5, 500).unwrap();
        assert!(env.sigma < 1.0);
        let long = survival_curve(&chain, 5, 2000);
        for (t, s) in long.iter().enumerate() {
            assert!(*s <= env.at(t) * (1.0 + 1e-9) + 1e-300, "t={t}");
        }
        // Power iteration on Ḡ.
        let gbar = chain.interior();
        let mut v = DVector::from_element(gbar.nrows(), 1.0);
        let mut rho = 0.0;
        for _ in 0..5000 {
            let w = &gbar * &v;
            rho = w.norm() / v.norm();
            v = w.normalize();
        }
        assert!(rho <= env.sigma + 1e-12, "{rho} > {}", env.sigma);

        let instant = build_transition_matrix(&uniform(1, 0), &Policy::constant(3, 2, RIGHT)).unwrap();
        let e = geometric_envelope(&instant, 2, 10);
        assert_eq!((e.c, e.sigma), (1.0, 0.0));
    }

    #[test]
    fn exact_reward_deterministic_exit() {
        let spec = catalog::interval41(0, 0.0);
        let chain = build_transition_matrix(&spec, &threshold_policy_1d(-1, &spec)).unwrap();
        let r = expected_total_reward_exact(&chain, -1.0, 0.0, 20).unwrap();
        assert_eq!(r.expected_reward, -21.0);
        assert_eq!(r.mfpt, 21.0);
        assert_eq!(fundamental_mfpt(&chain).unwrap()[20], 21.0);
    }

    #[test]
    fn exact_mfpt_agrees_with_fundamental_matrix_and_mc() {
        let spec = catalog::interval41(5, 0.0);
        let policy = threshold_policy_1d(1, &spec);
        let chain = build_transition_matrix(&spec, &policy).unwrap();
        let series = expected_total_reward_exact(&chain, -1.0, 0.0, 20).unwrap();
        let direct = fundamental_mfpt(&chain).unwrap()[20];
        assert!((series.mfpt - direct).abs() < 1e-8);
        assert!((series.expected_reward + direct).abs() < 1e-8);
        let env = Env::new(spec).unwrap();
        let mc = mc_policy_mfpt(&policy, &env, 100_000, 3);
        assert!((mc.mfpt - direct).abs() <= 3.0 * mc.standard_error(), "{} vs {direct}", mc.mfpt);
    }

    #[test]
    fn exact_fpt_spread_matches_mc() {
        let spec = catalog::interval41(3, 0.0);
        let policy = threshold_policy_1d(0, &spec);
        let chain = build_transition_matrix(&spec, &policy).unwrap();
        let (mean, std) = fundamental_fpt_moments(&chain).unwrap();
        let mc = mc_policy_mfpt(&policy, &Env::new(spec).unwrap(), 200_000, 8);
        assert!((mc.mfpt - mean[20]).abs() <= 3.0 * mc.standard_error());
        assert!((mc.std - std[20]).abs() / std[20] < 0.02, "{} vs {}", mc.std, std[20]);

        let cold = catalog::interval41(0, 0.0);
        let chain = build_transition_matrix(&cold, &threshold_policy_1d(-1, &cold)).unwrap();
        assert!(fundamental_fpt_moments(&chain).unwrap().1[20].abs() < 1e-6);
    }

    #[test]
    fn survival_complements_absorbed_mass() {
        let spec = catalog::interval41_drift(3, 0.2);
        let chain = build_transition_matrix(&spec, &threshold_policy_1d(1, &spec)).unwrap();
        let curve = survival_curve(&chain, 20, 60);
        let mut pow = chain.matrix().clone();
        for (t, s) in curve.iter().enumerate().skip(1) {
            if t > 1 {
                pow = &pow * chain.matrix();
            }
            let absorbed = pow[(20, chain.n_transient())];
            assert!((s - (1.0 - absorbed)).abs() < 1e-12);
        }
    }

    #[test]
    fn theorem_bounds() {
        let spec = uniform(5, 2);
        let chain = build_transition_matrix(&spec, &threshold_policy_1d(0, &spec)).unwrap();
        let env = geometric_envelope(&chain, 5, 500);
        for r_target in [0.0, 5.0, 100.0] {
            let sum = expected_total_reward_exact(&chain, -1.0, r_target, 5).unwrap();
            let check = theorem_check(&sum, &env, r_target);
            assert!(check.absolute_holds, "{check:?}");
            assert!(sum.expected_reward.is_finite());
        }
        // With r_target = 0 every coefficient is negative and the signed form fails.
        let sum = expected_total_reward_exact(&chain, -1.0, 0.0, 5).unwrap();
        assert!(!theorem_check(&sum, &env, 0.0).signed_holds);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn powers_stay_stochastic_and_survival_is_monotone(
            t in 0u32..6, k in -1i32..6, p in 0.0f64..0.5, fc in any::<bool>(), after_noise in any::<bool>()
        ) {
            let mut spec = catalog::interval(15, t, p, 11);
            if !fc { spec.absorption = Absorption::FinalPosition; }
            if after_noise { spec.drift_order = DriftOrder::AfterNoise; }
            let chain = build_transition_matrix(&spec, &threshold_policy_1d(k, &spec)).unwrap();
            let mut pow = chain.matrix().clone();
            for _ in 0..30 {
                pow = &pow * chain.matrix();
            }
            for i in 0..pow.nrows() {
                prop_assert!((pow.row(i).sum() - 1.0).abs() < 1e-9);
            }
            let curve = survival_curve(&chain, 7, 100);
            prop_assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-15));
            prop_assert!(check_submatrix_lemma(chain.matrix(), 50).passed);
        }
    }
}
