use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::env::GridSpec;
use crate::error::{Error, Result};
use crate::eval::DEFAULT_CUTOFF;
use crate::td::{Algorithm, EpsilonSchedule, Hyperparams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Train populations over the grid and evaluate greedy policies at checkpoints.
    #[default]
    Population,
    /// Trained Q-learning MFPT against the best threshold policy (1D).
    McVsQ,
    /// Exact and Monte Carlo cost of going right under drift, plus trained choices (1D).
    DriftGap,
    /// Absorbing-chain lemma suite and simulation cross-checks.
    Theory,
}

/// A constant exploration rate, or a schedule object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSetting {
    Constant(f64),
    Schedule(EpsilonSchedule),
}

impl EpsilonSetting {
    pub fn label(&self) -> String {
        match self {
            EpsilonSetting::Constant(e) => super::report::fmt_num(*e),
            EpsilonSetting::Schedule(EpsilonSchedule::Constant) => "constant".into(),
            EpsilonSetting::Schedule(EpsilonSchedule::ExponentialDecay { .. }) => "exp_decay".into(),
        }
    }

    fn apply(&self, hyper: &mut Hyperparams) {
        match *self {
            EpsilonSetting::Constant(e) => {
                hyper.epsilon = e;
                hyper.epsilon_schedule = EpsilonSchedule::Constant;
            }
            EpsilonSetting::Schedule(s) => hyper.epsilon_schedule = s,
        }
    }
}

/// Sweep axes. An empty list means "use the base value".
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamGrid {
    pub alpha: Vec<f64>,
    /// Substituted for `{T}` in environment templates.
    pub temperature: Vec<u32>,
    /// Substituted for `{p}` in environment templates.
    pub drift: Vec<f64>,
    pub epsilon: Vec<EpsilonSetting>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub cutoff: u64,
    pub rollouts_per_agent: usize,
    /// Write path-density maps for 2D grid points at the final checkpoint.
    pub density: bool,
    /// Monte Carlo runs per fixed policy (drift gap, best threshold policy, theory cross-checks).
    pub mc_runs: u64,
    /// Monte Carlo runs per chain when cross-checking exact MFPTs (theory suite).
    pub cross_validation_runs: u64,
    /// Threshold family searched for the best policy.
    pub threshold_ks: Vec<i32>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            cutoff: DEFAULT_CUTOFF,
            rollouts_per_agent: 1,
            density: false,
            mc_runs: 100_000,
            cross_validation_runs: 100_000,
            threshold_ks: vec![-1, 0, 1, 2, 3, 4],
        }
    }
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::QLearning]
}

fn one() -> usize {
    1
}

/// Declarative description of one experiment. Every grid point is a complete
/// runnable cell; the seed makes the run reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub kind: ExperimentKind,
    /// Catalog identifiers, optionally with `{T}` / `{p}` placeholders.
    #[serde(default)]
    pub environments: Vec<String>,
    /// Fields merged into every resolved GridSpec (e.g. `{"absorption": "final_position"}`).
    #[serde(default)]
    pub env_overrides: serde_json::Map<String, serde_json::Value>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub agents: usize,
    /// Independent repetitions of each population.
    #[serde(default = "one")]
    pub runs: usize,
    #[serde(default)]
    pub grid: ParamGrid,
    #[serde(default)]
    pub hyper: Hyperparams,
    #[serde(default)]
    pub frames: u64,
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub eval: EvalSettings,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// One fully specified cell of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub environment: String,
    pub spec: GridSpec,
    pub algorithm: Algorithm,
    pub epsilon: EpsilonSetting,
    pub hyper: Hyperparams,
}

impl GridPoint {
    /// Highest cell temperature of the world.
    pub fn temperature(&self) -> u32 {
        self.spec.temperature.iter().copied().max().unwrap_or(0)
    }

    /// Highest drift probability of the world.
    pub fn drift(&self) -> f64 {
        self.spec.drift.iter().copied().fold(0.0, f64::max)
    }

    /// Stable identifier; also keys the point's random streams, so adding
    /// values to a sweep does not change results of existing points.
    pub fn key(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            self.environment,
            self.algorithm,
            super::report::fmt_num(self.hyper.alpha),
            self.epsilon.label()
        )
    }

    /// File-name-safe form of [`GridPoint::key`].
    pub fn slug(&self) -> String {
        super::report::slugify(&self.key())
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidConfig { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must be non-empty"));
        }
        self.hyper.validate().map_err(|e| match e {
            Error::InvalidConfig { path, message } => invalid(format!("hyper.{path}"), message),
            other => other,
        })?;
        for (i, a) in self.grid.alpha.iter().enumerate() {
            if !(*a > 0.0 && *a <= 1.0) {
                return Err(invalid(format!("grid.alpha[{i}]"), format!("{a} not in (0, 1]")));
            }
        }
        for (i, p) in self.grid.drift.iter().enumerate() {
            if !(0.0..=1.0).contains(p) {
                return Err(invalid(format!("grid.drift[{i}]"), format!("{p} not in [0, 1]")));
            }
        }
        for (i, e) in self.grid.epsilon.iter().enumerate() {
            let mut h = self.hyper;
            e.apply(&mut h);
            h.validate().map_err(|err| invalid(format!("grid.epsilon[{i}]"), err.to_string()))?;
        }
        if self.eval.cutoff == 0 {
            return Err(invalid("eval.cutoff", "must be positive"));
        }
        if self.eval.rollouts_per_agent == 0 {
            return Err(invalid("eval.rollouts_per_agent", "must be positive"));
        }
        if self.runs == 0 {
            return Err(invalid("runs", "must be positive"));
        }
        if self.kind == ExperimentKind::Theory {
            return Ok(());
        }
        if self.environments.is_empty() {
            return Err(invalid("environments", "at least one environment is required"));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("algorithms", "at least one algorithm is required"));
        }
        let needs_training = self.kind != ExperimentKind::DriftGap || self.agents > 0;
        if needs_training {
            if self.agents == 0 {
                return Err(invalid("agents", "must be positive"));
            }
            if self.frames == 0 {
                return Err(invalid("frames", "must be positive"));
            }
        }
        for (i, c) in self.checkpoints.iter().enumerate() {
            if *c == 0 || *c > self.frames {
                return Err(invalid(format!("checkpoints[{i}]"), format!("{c} not in 1..={}", self.frames)));
            }
        }
        if matches!(self.kind, ExperimentKind::McVsQ | ExperimentKind::DriftGap) && self.eval.threshold_ks.is_empty() {
            return Err(invalid("eval.threshold_ks", "must be non-empty"));
        }
        let points = self.grid_points()?;
        if matches!(self.kind, ExperimentKind::McVsQ | ExperimentKind::DriftGap) {
            if let Some(p) = points.iter().find(|p| p.spec.dims != 1) {
                return Err(invalid("environments", format!("{} is not a 1D interval", p.environment)));
            }
        }
        Ok(())
    }

    /// Checkpoints in increasing order, always ending with the frame budget.
    pub fn checkpoint_frames(&self) -> Vec<u64> {
        let mut marks: Vec<u64> = self.checkpoints.iter().copied().filter(|&c| c <= self.frames).collect();
        marks.push(self.frames);
        marks.sort_unstable();
        marks.dedup();
        marks
    }

    /// Expands the sweep in the order environment, T, p, algorithm, α, ε.
    pub fn grid_points(&self) -> Result<Vec<GridPoint>> {
        let mut points = Vec::new();
        for (ei, template) in self.environments.iter().enumerate() {
            let temps: Vec<Option<u32>> = if template.contains("{T}") {
                if self.grid.temperature.is_empty() {
                    return Err(invalid(format!("environments[{ei}]"), "uses {T} but grid.temperature is empty"));
                }
                self.grid.temperature.iter().map(|&t| Some(t)).collect()
            } else {
                vec![None]
            };
            let drifts: Vec<Option<f64>> = if template.contains("{p}") {
                if self.grid.drift.is_empty() {
                    return Err(invalid(format!("environments[{ei}]"), "uses {p} but grid.drift is empty"));
                }
                self.grid.drift.iter().map(|&p| Some(p)).collect()
            } else {
                vec![None]
            };
            for &t in &temps {
                for &p in &drifts {
                    let mut name = template.clone();
                    if let Some(t) = t {
                        name = name.replace("{T}", &t.to_string());
                    }
                    if let Some(p) = p {
                        name = name.replace("{p}", &super::report::fmt_num(p));
                    }
                    let spec = self.resolve(&name).map_err(|e| invalid(format!("environments[{ei}]"), e.to_string()))?;
                    let alphas = if self.grid.alpha.is_empty() { vec![self.hyper.alpha] } else { self.grid.alpha.clone() };
                    let epsilons = if self.grid.epsilon.is_empty() {
                        vec![match self.hyper.epsilon_schedule {
                            EpsilonSchedule::Constant => EpsilonSetting::Constant(self.hyper.epsilon),
                            s => EpsilonSetting::Schedule(s),
                        }]
                    } else {
                        self.grid.epsilon.clone()
                    };
                    for &algorithm in &self.algorithms {
                        for &alpha in &alphas {
                            for eps in &epsilons {
                                let mut hyper = self.hyper;
                                hyper.alpha = alpha;
                                eps.apply(&mut hyper);
                                points.push(GridPoint {
                                    environment: name.clone(),
                                    spec: spec.clone(),
                                    algorithm,
                                    epsilon: *eps,
                                    hyper,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(points)
    }

    fn resolve(&self, name: &str) -> Result<GridSpec> {
        let spec = catalog::lookup(name)?;
        if self.env_overrides.is_empty() {
            return Ok(spec);
        }
        let mut value = serde_json::to_value(&spec)?;
        let obj = value.as_object_mut().expect("GridSpec serialises to an object");
        for (k, v) in &self.env_overrides {
            if !obj.contains_key(k) {
                return Err(invalid(format!("env_overrides.{k}"), "not a GridSpec field"));
            }
            obj.insert(k.clone(), v.clone());
        }
        let spec: GridSpec = serde_json::from_value(value).map_err(|e| invalid("env_overrides", e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}
