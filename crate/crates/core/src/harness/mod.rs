//! Experiment configs, scenario presets, parallel population runs and result emission.

pub mod checks;
pub mod config;
pub mod report;
pub mod run;
pub mod scenarios;
pub mod theory;

pub use checks::CheckOutcome;
pub use config::{EpsilonSetting, EvalSettings, ExperimentConfig, ExperimentKind, GridPoint, ParamGrid};
pub use report::{emit_report, fmt_num, Table, Value};
pub use run::{config_from_json, execute, run_experiment, RunOutput, RunSummary};
pub use scenarios::{scenario, scenario_catalog, SCENARIOS};
