use rayon::prelude::*;

use super::report::{fmt_num, slugify, Table, Value};
use crate::catalog;
use crate::env::{Env, GridSpec};
use crate::error::Result;
use crate::eval::{mc_policy_mfpt, threshold_name, threshold_policy_1d};
use crate::markov::{self, TransitionMatrix};
use crate::seed::derive_seed;

pub const LEMMA_HORIZON: usize = 200;
pub const ENVELOPE_FIT: usize = 50;
pub const ENVELOPE_VERIFY: usize = 500;
/// Float slack for the exact checks.
pub const SLACK: f64 = 1e-9;
/// Widths of the uniform intervals used for the survival bound.
pub const UNIFORM_ZETAS: [usize; 4] = [2, 5, 10, 20];
pub const UNIFORM_W: u32 = 2;

/// `(T, drift)` pairs of the drift experiments.
pub fn drift_grid() -> Vec<(u32, f64)> {
    let mut grid = Vec::new();
    for t in [1, 2] {
        for p in [0.1, 0.15, 0.2] {
            grid.push((t, p));
        }
    }
    for i in 0..7 {
        grid.push((3, 0.1 + 0.05 * i as f64));
    }
    grid
}

/// Every 1D spec the theory suite covers, with its catalog name.
pub fn canonical_specs() -> Vec<(String, GridSpec)> {
    let mut out = Vec::new();
    for t in 0..=10 {
        out.push((format!("interval41({t})"), catalog::interval41(t, 0.0)));
    }
    for (t, p) in drift_grid() {
        out.push((format!("interval41_drift({t},{})", fmt_num(p)), catalog::interval41_drift(t, p)));
    }
    for z in UNIFORM_ZETAS {
        out.push((format!("uniform_interval({z},{UNIFORM_W})"), catalog::uniform_interval(z, UNIFORM_W)));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheorySettings {
    pub threshold_ks: Vec<i32>,
    /// Runs for the reward cross-check against the exact series.
    pub reward_mc_runs: u64,
    /// Runs per chain for the MFPT cross-validation.
    pub cross_validation_runs: u64,
    pub seed: u64,
}

/// Tables and CSV artifacts produced by [`run_theory`].
#[derive(Clone, Debug, PartialEq)]
pub struct TheoryOutput {
    /// `check, subject, value, bound, passed`.
    pub checks: Table,
    /// Exact and simulated MFPT for every chain.
    pub mfpt: Table,
    /// `(file name, contents)` of matrix and survival-curve CSVs.
    pub artifacts: Vec<(String, String)>,
}

struct ChainResult {
    rows: Vec<Vec<Value>>,
    mfpt_row: Vec<Value>,
}

fn row(check: &str, subject: &str, value: f64, bound: f64, passed: bool) -> Vec<Value> {
    vec![check.into(), subject.into(), value.into(), bound.into(), passed.into()]
}

fn analyse(name: &str, spec: &GridSpec, k: i32, settings: &TheorySettings) -> Result<ChainResult> {
    let policy = threshold_policy_1d(k, spec);
    let subject = format!("{name} {}", threshold_name(k));
    let chain = markov::build_transition_matrix(spec, &policy)?;
    let s0 = spec.center() as usize;
    let mut rows = Vec::new();

    let lemma = markov::check_submatrix_lemma(chain.matrix(), LEMMA_HORIZON);
    rows.push(row("submatrix_lemma", &subject, lemma.max_deviation, SLACK, lemma.passed));

    let curve = markov::survival_curve(&chain, s0, ENVELOPE_VERIFY);
    let rise = curve.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    rows.push(row("survival_monotone", &subject, rise, SLACK, rise <= SLACK));

    let envelope = markov::geometric_envelope(&chain, s0, ENVELOPE_FIT);
    let worst = curve
        .iter()
        .enumerate()
        .map(|(t, &s)| s - envelope.at(t))
        .fold(f64::NEG_INFINITY, f64::max);
    rows.push(row("envelope_dominates", &subject, worst, SLACK, envelope.sigma < 1.0 && worst <= SLACK));
    rows.push(row("envelope_rate", &subject, envelope.sigma, 1.0, envelope.sigma < 1.0));

    let summary = markov::expected_total_reward_exact(&chain, spec.r_tick as f64, spec.r_target as f64, s0)?;
    let theorem = markov::theorem_check(&summary, &envelope, spec.r_target as f64);
    rows.push(row(
        "reward_bound",
        &subject,
        summary.expected_reward.abs(),
        theorem.absolute_bound,
        summary.expected_reward.is_finite() && theorem.absolute_holds,
    ));

    if name.starts_with("uniform_interval") {
        let check = markov::check_survival_bound(spec, &policy)?;
        rows.push(row("survival_bound", &subject, check.worst_survival, check.bound.bound, check.holds));
    }

    let (mean, std) = markov::fundamental_fpt_moments(&chain)?;
    let env = Env::new(spec.clone())?;
    let mc = mc_policy_mfpt(&policy, &env, settings.cross_validation_runs, derive_seed(settings.seed, 0, &format!("cv|{subject}")));
    let z = z_score(mc.mfpt - mean[s0], mc.standard_error());
    rows.push(row("mfpt_cross_validation", &subject, z, 3.0, z <= 3.0 && mc.capped == 0));

    let mfpt_row = vec![
        name.into(),
        threshold_name(k).into(),
        mean[s0].into(),
        std[s0].into(),
        summary.mfpt.into(),
        mc.mfpt.into(),
        mc.standard_error().into(),
        mc.n_runs.into(),
    ];
    Ok(ChainResult { rows, mfpt_row })
}

/// `|diff| / se`, zero when both vanish (deterministic chains).
fn z_score(diff: f64, se: f64) -> f64 {
    if diff.abs() <= SLACK {
        0.0
    } else {
        diff.abs() / se
    }
}

/// Exact reward series against simulated returns `r_tick * τ + r_target`.
fn reward_cross_check(name: &str, spec: &GridSpec, k: i32, settings: &TheorySettings) -> Result<Vec<Value>> {
    let policy = threshold_policy_1d(k, spec);
    let subject = format!("{name} {}", threshold_name(k));
    let chain = markov::build_transition_matrix(spec, &policy)?;
    let summary = markov::expected_total_reward_exact(&chain, spec.r_tick as f64, spec.r_target as f64, spec.center() as usize)?;
    let env = Env::new(spec.clone())?;
    let mc = mc_policy_mfpt(&policy, &env, settings.reward_mc_runs, derive_seed(settings.seed, 0, &format!("reward|{subject}")));
    let simulated = spec.r_tick as f64 * mc.mfpt + spec.r_target as f64;
    let z = z_score(simulated - summary.expected_reward, spec.r_tick.unsigned_abs() as f64 * mc.standard_error());
    Ok(row("reward_vs_mc", &subject, z, 3.0, z <= 3.0 && mc.capped == 0))
}

fn artifacts_for(name: &str, chain: &TransitionMatrix, s0: usize) -> Vec<(String, String)> {
    let slug = slugify(name);
    let envelope = markov::geometric_envelope(chain, s0, ENVELOPE_FIT);
    vec![
        (format!("markov_matrix_{slug}.csv"), chain.to_csv()),
        (format!("markov_survival_{slug}.csv"), markov::survival_csv(&markov::survival_curve(chain, s0, ENVELOPE_VERIFY), Some(&envelope))),
    ]
}

/// Runs the lemma suite over every canonical chain and threshold policy.
pub fn run_theory(settings: &TheorySettings) -> Result<TheoryOutput> {
    let specs = canonical_specs();
    let jobs: Vec<(&str, &GridSpec, i32)> = specs
        .iter()
        .flat_map(|(n, s)| settings.threshold_ks.iter().map(move |&k| (n.as_str(), s, k)))
        .collect();
    let results: Vec<ChainResult> = jobs.par_iter().map(|(n, s, k)| analyse(n, s, *k, settings)).collect::<Result<_>>()?;

    let mut checks = Table::new(&["check", "subject", "value", "bound", "passed"]);
    let mut mfpt = Table::new(&["environment", "policy", "mfpt_exact", "std_exact", "mfpt_series", "mfpt_mc", "se_mc", "mc_runs"]);
    for r in results {
        for row in r.rows {
            checks.push(row);
        }
        mfpt.push(r.mfpt_row);
    }

    let reward_subjects = [
        ("interval41(3)".to_string(), catalog::interval41(3, 0.0), 0),
        ("interval41_drift(3,0.3)".to_string(), catalog::interval41_drift(3, 0.3), 0),
        (format!("uniform_interval(5,{UNIFORM_W})"), catalog::uniform_interval(5, UNIFORM_W), 0),
    ];
    let reward_rows: Vec<Vec<Value>> =
        reward_subjects.par_iter().map(|(n, s, k)| reward_cross_check(n, s, *k, settings)).collect::<Result<_>>()?;
    for r in reward_rows {
        checks.push(r);
    }

    let mut artifacts = Vec::new();
    for (name, spec, k) in [
        ("interval41(3) pi_RR", catalog::interval41(3, 0.0), 1),
        ("uniform_interval(5,2) pi_R", catalog::uniform_interval(5, 2), 0),
    ] {
        let chain = markov::build_transition_matrix(&spec, &threshold_policy_1d(k, &spec))?;
        artifacts.extend(artifacts_for(name, &chain, spec.center() as usize));
    }
    Ok(TheoryOutput { checks, mfpt, artifacts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_set_covers_drift_grid() {
        let names: Vec<String> = canonical_specs().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), 11 + 13 + 4);
        assert!(names.contains(&"interval41_drift(3,0.4)".to_string()));
        assert!(names.contains(&"interval41_drift(2,0.15)".to_string()));
        assert!(names.contains(&"uniform_interval(20,2)".to_string()));
    }

    #[test]
    fn small_suite_passes() {
        let spec = catalog::uniform_interval(2, 2);
        let settings = TheorySettings { threshold_ks: vec![0], reward_mc_runs: 1000, cross_validation_runs: 20_000, seed: 3 };
        let r = analyse("uniform_interval(2,2)", &spec, 0, &settings).unwrap();
        let names: Vec<&str> = r.rows.iter().map(|row| row[0].as_str().unwrap()).collect();
        assert_eq!(
            names,
            ["submatrix_lemma", "survival_monotone", "envelope_dominates", "envelope_rate", "reward_bound", "survival_bound", "mfpt_cross_validation"]
        );
        for row in &r.rows {
            assert_eq!(row[4], Value::from(true), "{row:?}");
        }
    }

    #[test]
    fn deterministic_chain_has_zero_z() {
        assert_eq!(z_score(0.0, 0.0), 0.0);
        assert!((z_score(0.3, 0.1) - 3.0).abs() < 1e-12);
    }
}
