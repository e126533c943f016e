use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, GridPoint};
use super::report::{density_svg, fmt_num, slugify, Table, Value};
use super::theory::{run_theory, TheorySettings};
use crate::env::{Absorption, DriftOrder, Env};
use crate::error::{Error, Result};
use crate::eval::{
    self, classify_threshold, evaluate_population, greedy_policy, mc_policy_mfpt, most_common_policy, noiseless_shortest_path,
    path_density, threshold_name, threshold_policy_1d, EvalConfig, FptStats, MfptMethod, Policy, PopulationPolicy,
};
use crate::markov;
use crate::seed::{derive_seed, seed_stream};
use crate::td::{train, QTable};

const POINT_COLUMNS: [&str; 8] = ["scenario", "environment", "algorithm", "alpha", "epsilon", "temperature", "drift", "run"];

const POPULATION_COLUMNS: [&str; 12] = [
    "checkpoint",
    "agents",
    "failed_pct",
    "heated_pct",
    "route_split",
    "mfpt",
    "fpt_std",
    "shortest_pct",
    "modal_policy",
    "pct_right_x0",
    "pct_right_x0m1",
    "pct_right_x0m2",
];

const MC_VS_Q_COLUMNS: [&str; 12] = [
    "agents",
    "q_mfpt",
    "q_std",
    "failed_pct",
    "modal_policy",
    "best_k",
    "best_policy",
    "best_mfpt_exact",
    "best_std_exact",
    "best_mfpt_mc",
    "best_std_mc",
    "gap_pct",
];

const DRIFT_GAP_COLUMNS: [&str; 10] = [
    "agents",
    "pi_l_exact",
    "pi_r_exact",
    "gap_exact_pct",
    "pi_l_mc",
    "pi_r_mc",
    "gap_mc_pct",
    "modal_policy",
    "pct_right_x0",
    "pct_right_x0m1",
];

/// Result table plus named CSV/JSON artifacts, before anything touches disk.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub results: Table,
    pub artifacts: Vec<(String, String)>,
}

/// Column header of the results table for an experiment kind.
pub fn result_columns(kind: ExperimentKind) -> Vec<&'static str> {
    let tail: &[&str] = match kind {
        ExperimentKind::Population => &POPULATION_COLUMNS,
        ExperimentKind::McVsQ => &MC_VS_Q_COLUMNS,
        ExperimentKind::DriftGap => &DRIFT_GAP_COLUMNS,
        ExperimentKind::Theory => return vec!["check", "subject", "value", "bound", "passed"],
    };
    POINT_COLUMNS.iter().chain(tail).copied().collect()
}

fn point_values(config: &ExperimentConfig, p: &GridPoint, run: usize) -> Vec<Value> {
    vec![
        config.name.as_str().into(),
        p.environment.as_str().into(),
        p.algorithm.name().into(),
        p.hyper.alpha.into(),
        p.epsilon.label().into(),
        p.temperature().into(),
        p.drift().into(),
        run.into(),
    ]
}

fn pct(x: f64) -> Value {
    (100.0 * x).into()
}

fn modal_columns(p: &GridPoint, modal: Option<&PopulationPolicy>) -> [Value; 4] {
    let (Some(m), 1) = (modal, p.spec.dims) else { return [Value::Empty, Value::Empty, Value::Empty, Value::Empty] };
    let c = p.spec.center() as usize;
    let name = classify_threshold(&m.policy, &p.spec).map_or_else(|| "other".to_string(), threshold_name);
    let right = |cell: usize| -> Value { if cell < m.frequencies.len() { m.pct_right(cell).into() } else { Value::Empty } };
    [name.into(), right(c), right(c.wrapping_sub(1)), right(c.wrapping_sub(2))]
}

/// Greedy policies of every agent at every checkpoint, plus agent 0's final table.
fn train_population(config: &ExperimentConfig, p: &GridPoint, env: &Env, cell_seed: u64, marks: &[u64]) -> (Vec<Vec<Policy>>, QTable) {
    let per_agent: Vec<(Vec<Policy>, Option<QTable>)> = (0..config.agents)
        .into_par_iter()
        .map(|i| {
            let out = train(env, p.algorithm, &p.hyper, config.frames, marks, seed_stream(cell_seed, i as u64, "train"));
            let policies = out.snapshots.iter().map(|(_, l)| greedy_policy(l)).collect();
            (policies, (i == 0).then(|| out.learner.decision_table()))
        })
        .collect();
    let mut by_mark = vec![Vec::with_capacity(config.agents); marks.len()];
    let mut q0 = None;
    for (policies, q) in per_agent {
        for (slot, pol) in by_mark.iter_mut().zip(policies) {
            slot.push(pol);
        }
        q0 = q0.or(q);
    }
    (by_mark, q0.expect("population is non-empty"))
}

/// Shares of successful rollouts by the hottest temperature visited, e.g. `T0=10;T1=60;T2=30`.
fn route_split(stats: &FptStats) -> Value {
    let n = stats.samples.len();
    if n == 0 {
        return Value::Empty;
    }
    let parts: Vec<String> =
        stats.route_counts.by_hottest.iter().map(|(t, c)| format!("T{t}={}", fmt_num(100.0 * *c as f64 / n as f64))).collect();
    parts.join(";").into()
}

fn eval_config(config: &ExperimentConfig) -> EvalConfig {
    EvalConfig { cutoff: config.eval.cutoff, rollouts_per_agent: config.eval.rollouts_per_agent }
}

fn fpt_csv(stats: &FptStats) -> String {
    let mut t = Table::new(&["outcome", "fpt", "count"]);
    let mut hist = std::collections::BTreeMap::new();
    for &s in &stats.samples {
        *hist.entry(s).or_insert(0u64) += 1;
    }
    for (fpt, count) in hist {
        t.push(vec!["finished".into(), fpt.into(), count.into()]);
    }
    t.push(vec!["failed".into(), Value::Empty, stats.failed_count.into()]);
    t.to_csv()
}

fn run_population(config: &ExperimentConfig, points: &[GridPoint], out: &mut RunOutput) -> Result<()> {
    let marks = config.checkpoint_frames();
    let cfg = eval_config(config);
    for p in points {
        let env = Env::new(p.spec.clone())?;
        let shortest = noiseless_shortest_path(&p.spec);
        for run in 0..config.runs {
            let cell_seed = derive_seed(config.seed, run as u64, &p.key());
            let (by_mark, q0) = train_population(config, p, &env, cell_seed, &marks);
            for (mark, policies) in marks.iter().zip(&by_mark) {
                let stats = evaluate_population(policies, &env, &cfg, derive_seed(cell_seed, *mark, "eval"));
                let shortest_pct = shortest.map(|s| {
                    let hits = stats.samples.iter().filter(|&&x| x == s).count() as f64;
                    100.0 * hits / stats.total() as f64
                });
                let modal = (p.spec.dims == 1).then(|| most_common_policy(policies));
                let mut row = point_values(config, p, run);
                row.extend([
                    (*mark).into(),
                    config.agents.into(),
                    pct(stats.failed_fraction()),
                    pct(stats.heated_fraction()),
                    route_split(&stats),
                    stats.mfpt.into(),
                    stats.std.into(),
                    shortest_pct.into(),
                ]);
                row.extend(modal_columns(p, modal.as_ref()));
                out.results.push(row);

                if *mark == config.frames && run == 0 {
                    let slug = p.slug();
                    out.artifacts.push((format!("fpt_{slug}.csv"), fpt_csv(&stats)));
                    out.artifacts.push((format!("qtable_{slug}.csv"), q0.to_csv()));
                    let policy = modal.map_or_else(|| policies[0].clone(), |m| m.policy);
                    out.artifacts.push((format!("policy_{slug}.csv"), policy.to_csv()));
                    if config.eval.density && p.spec.dims == 2 {
                        let map = path_density(policies, &env, 1, config.eval.cutoff, derive_seed(cell_seed, *mark, "density"));
                        out.artifacts.push((format!("path_density_{slug}.csv"), map.to_csv()));
                        out.artifacts.push((format!("path_density_{slug}.svg"), density_svg(&map)));
                    }
                }
            }
        }
    }
    Ok(())
}

fn gap_pct(value: f64, reference: f64) -> f64 {
    100.0 * (value - reference) / reference
}

fn run_mc_vs_q(config: &ExperimentConfig, points: &[GridPoint], out: &mut RunOutput) -> Result<()> {
    let cfg = eval_config(config);
    for p in points {
        let env = Env::new(p.spec.clone())?;
        let c = p.spec.center() as usize;
        let (best_k, best_mfpt) = eval::best_threshold_policy(&env, config.eval.threshold_ks.iter().copied(), MfptMethod::Exact)?;
        let best = threshold_policy_1d(best_k, &p.spec);
        let (_, std) = markov::fundamental_fpt_moments(&markov::build_transition_matrix(&p.spec, &best)?)?;
        for run in 0..config.runs {
            let cell_seed = derive_seed(config.seed, run as u64, &p.key());
            let (by_mark, _) = train_population(config, p, &env, cell_seed, &[config.frames]);
            let policies = &by_mark[0];
            let stats = evaluate_population(policies, &env, &cfg, derive_seed(cell_seed, config.frames, "eval"));
            let mc = mc_policy_mfpt(&best, &env, config.eval.mc_runs, derive_seed(cell_seed, 0, "mc"));
            let modal = most_common_policy(policies);
            let mut row = point_values(config, p, run);
            row.extend([
                config.agents.into(),
                stats.mfpt.into(),
                stats.std.into(),
                pct(stats.failed_fraction()),
                modal_columns(p, Some(&modal))[0].clone(),
                best_k.into(),
                threshold_name(best_k).into(),
                best_mfpt.into(),
                std[c].into(),
                mc.mfpt.into(),
                mc.std.into(),
                gap_pct(stats.mfpt, best_mfpt).into(),
            ]);
            out.results.push(row);
        }
    }
    Ok(())
}

fn run_drift_gap(config: &ExperimentConfig, points: &[GridPoint], out: &mut RunOutput) -> Result<()> {
    for p in points {
        let env = Env::new(p.spec.clone())?;
        let c = p.spec.center() as usize;
        let exact = |k: i32| -> Result<f64> {
            let chain = markov::build_transition_matrix(&p.spec, &threshold_policy_1d(k, &p.spec))?;
            Ok(markov::fundamental_mfpt(&chain)?[c])
        };
        let (left, right) = (exact(-1)?, exact(0)?);
        for run in 0..config.runs {
            let cell_seed = derive_seed(config.seed, run as u64, &p.key());
            let mc = |k: i32, tag: u64| {
                (config.eval.mc_runs > 0)
                    .then(|| mc_policy_mfpt(&threshold_policy_1d(k, &p.spec), &env, config.eval.mc_runs, derive_seed(cell_seed, tag, "mc")).mfpt)
            };
            let (mc_left, mc_right) = (mc(-1, 0), mc(0, 1));
            let modal = (config.agents > 0).then(|| {
                let (by_mark, _) = train_population(config, p, &env, cell_seed, &[config.frames]);
                most_common_policy(&by_mark[0])
            });
            let m = modal_columns(p, modal.as_ref());
            let mut row = point_values(config, p, run);
            row.extend([
                config.agents.into(),
                left.into(),
                right.into(),
                gap_pct(right, left).into(),
                mc_left.into(),
                mc_right.into(),
                mc_left.zip(mc_right).map(|(l, r)| gap_pct(r, l)).into(),
                m[0].clone(),
                m[1].clone(),
                m[2].clone(),
            ]);
            out.results.push(row);
        }
    }
    Ok(())
}

/// Runs an experiment in memory. Identical configs give identical output
/// regardless of the size of the rayon pool.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut out = RunOutput { results: Table::new(&result_columns(config.kind)), artifacts: Vec::new() };
    if config.kind == ExperimentKind::Theory {
        let theory = run_theory(&TheorySettings {
            threshold_ks: config.eval.threshold_ks.clone(),
            reward_mc_runs: config.eval.mc_runs,
            cross_validation_runs: config.eval.cross_validation_runs,
            seed: config.seed,
        })?;
        out.results = theory.checks;
        out.artifacts.push(("theory_mfpt.csv".into(), theory.mfpt.to_csv()));
        out.artifacts.extend(theory.artifacts);
        return Ok(out);
    }
    let points = config.grid_points()?;
    let mut seen = Vec::new();
    for p in &points {
        if !seen.contains(&p.environment) {
            seen.push(p.environment.clone());
            out.artifacts.push((format!("spec_{}.json", slugify(&p.environment)), p.spec.to_json()));
        }
    }
    match config.kind {
        ExperimentKind::Population => run_population(config, &points, &mut out)?,
        ExperimentKind::McVsQ => run_mc_vs_q(config, &points, &mut out)?,
        ExperimentKind::DriftGap => run_drift_gap(config, &points, &mut out)?,
        ExperimentKind::Theory => unreachable!(),
    }
    Ok(out)
}

#[derive(Serialize)]
struct EnvironmentRecord {
    name: String,
    dims: u8,
    absorption: Absorption,
    drift_order: DriftOrder,
    max_temperature: u32,
    max_drift: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: &'a str,
    package: &'static str,
    version: &'static str,
    seed: u64,
    grid_points: usize,
    rows: usize,
    /// Environment semantics actually used, per resolved environment.
    environments: Vec<EnvironmentRecord>,
    eval_epsilon: f64,
    files: Vec<String>,
    config: &'a ExperimentConfig,
}

fn manifest(config: &ExperimentConfig, out: &RunOutput, files: &[String]) -> Result<String> {
    let points = if config.kind == ExperimentKind::Theory { Vec::new() } else { config.grid_points()? };
    let mut environments: Vec<EnvironmentRecord> = Vec::new();
    for p in &points {
        if environments.iter().any(|e| e.name == p.environment) {
            continue;
        }
        environments.push(EnvironmentRecord {
            name: p.environment.clone(),
            dims: p.spec.dims,
            absorption: p.spec.absorption,
            drift_order: p.spec.drift_order,
            max_temperature: p.temperature(),
            max_drift: p.drift(),
        });
    }
    let m = Manifest {
        scenario: &config.name,
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        grid_points: points.len(),
        rows: out.results.rows.len(),
        environments,
        eval_epsilon: 0.0,
        files: files.to_vec(),
        config,
    };
    Ok(serde_json::to_string_pretty(&m)?)
}

/// Files written by [`run_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub results: Table,
}

/// Executes `config` and writes `results.csv`, artifacts and `manifest.json`
/// into `dir`. A non-empty `dir` is refused unless `force` is set.
pub fn run_experiment(config: &ExperimentConfig, dir: &Path, force: bool) -> Result<RunSummary> {
    config.validate()?;
    if !force && dir.exists() && fs::read_dir(dir)?.next().is_some() {
        return Err(Error::OutputExists(dir.display().to_string()));
    }
    let out = execute(config)?;
    write_outputs(config, &out, dir)
}

/// Writes an executed run to `dir`.
pub fn write_outputs(config: &ExperimentConfig, out: &RunOutput, dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    let mut names = vec!["results.csv".to_string()];
    fs::write(dir.join("results.csv"), out.results.to_csv())?;
    for (name, contents) in &out.artifacts {
        fs::write(dir.join(name), contents)?;
        names.push(name.clone());
    }
    names.push("manifest.json".into());
    fs::write(dir.join("manifest.json"), manifest(config, out, &names)?)?;
    Ok(RunSummary { dir: dir.to_path_buf(), files: names.iter().map(|n| dir.join(n)).collect(), results: out.results.clone() })
}

/// Parses either a bare experiment config or a `manifest.json` from a previous run.
pub fn config_from_json(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidConfig { path: ".".into(), message: e.to_string() })?;
    match (value.get("config"), value.get("files")) {
        (Some(inner), Some(_)) => ExperimentConfig::from_json(&inner.to_string()),
        _ => ExperimentConfig::from_json(text),
    }
}

/// Convenience for callers that only print numbers.
pub fn describe_row(table: &Table, row: &[Value]) -> String {
    table
        .columns
        .iter()
        .zip(row)
        .map(|(c, v)| match v {
            Value::Float(f) => format!("{c}={}", fmt_num(*f)),
            Value::Int(i) => format!("{c}={i}"),
            Value::Text(s) => format!("{c}={s}"),
            Value::Empty => format!("{c}="),
        })
        .collect::<Vec<_>>()
        .join(" ")
}
