use super::config::{EpsilonSetting, EvalSettings, ExperimentConfig, ExperimentKind, ParamGrid};
use super::report::fmt_num;
use super::theory::drift_grid;
use crate::error::{Error, Result};
use crate::td::{Algorithm, EpsilonSchedule, Hyperparams};

/// Learning rates of the 2D sweeps.
pub const ALPHA_GRID: [f64; 12] = [0.07, 0.08, 0.09, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub const SCENARIOS: [&str; 13] = [
    "fig3_failed",
    "fig4_heated_route",
    "fig5_region_locations",
    "fig6_path_density",
    "fig7_mfpt",
    "fig9_mc_vs_q",
    "table1",
    "table2_drift",
    "fig11_drift_trend",
    "fig12_offline",
    "fig13_two_regions",
    "fig14_algo_comparison",
    "theory_validate",
];

fn base(name: &str, kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        kind,
        environments: Vec::new(),
        env_overrides: Default::default(),
        algorithms: vec![Algorithm::QLearning],
        agents: 1000,
        runs: 1,
        grid: ParamGrid::default(),
        hyper: Hyperparams::default(),
        frames: 50_000,
        checkpoints: Vec::new(),
        eval: EvalSettings::default(),
        seed: 20_240_601,
        output: None,
    }
}

fn envs(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// One-line description for `list-scenarios`.
pub fn describe(name: &str) -> &'static str {
    match name {
        "fig3_failed" => "2D L world, T 0-3 x alpha grid, 1000 agents: failed % at 20K and 300K frames",
        "fig4_heated_route" => "2D L world at T=3, alpha grid, 1000 agents: heated-route % from 20K to 300K frames",
        "fig5_region_locations" => "heated area moved to three other places, 100 agents, 50K frames",
        "fig6_path_density" => "path density for 4 algorithms x alpha {0.1, 0.9}, 500 agents, 50K frames",
        "fig7_mfpt" => "2D L world, T 0-3 x alpha grid, 1000 agents: MFPT and FPT spread",
        "fig9_mc_vs_q" => "1D interval, T 1-10: trained Q-learning MFPT against the best threshold policy",
        "table1" => "1D interval, T 0-10, 10^4 agents, 50K frames: modal policy and right-action shares",
        "table2_drift" => "1D interval with drift: exact and MC cost of going right, trained right-action share",
        "fig11_drift_trend" => "drift 0.3, T=3: Q vs Double Q, constant vs decaying epsilon, 5x100 agents to 300K",
        "fig12_offline" => "2D L world at T=3 trained with epsilon=1: route shares over time",
        "fig13_two_regions" => "two heated regions at T=1 and T=2: route split and path density",
        "fig14_algo_comparison" => "2D L world at T=3, 4 algorithms, 100 agents: MFPT over training time",
        "theory_validate" => "absorbing-chain lemma suite and simulation cross-checks on every 1D chain",
        _ => "",
    }
}

/// Named preset configurations.
pub fn scenario(name: &str) -> Result<ExperimentConfig> {
    let mut c = match name {
        "fig3_failed" | "fig7_mfpt" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&["grid2d_L({T})"]);
            c.grid.temperature = vec![0, 1, 2, 3];
            c.grid.alpha = ALPHA_GRID.to_vec();
            c.frames = 300_000;
            c.checkpoints = vec![20_000];
            c
        }
        "fig4_heated_route" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&["grid2d_L(3)"]);
            c.grid.alpha = ALPHA_GRID.to_vec();
            c.frames = 300_000;
            c.checkpoints = vec![20_000, 50_000, 100_000, 200_000];
            c
        }
        "fig5_region_locations" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&[
                "grid2d_L(3)",
                "grid2d_moved_region(mirrored,3)",
                "grid2d_moved_region(corner,3)",
                "grid2d_moved_region(band,3)",
            ]);
            c.agents = 100;
            c.eval.density = true;
            c
        }
        "fig6_path_density" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&["grid2d_L(3)"]);
            c.algorithms = Algorithm::ALL.to_vec();
            c.grid.alpha = vec![0.1, 0.9];
            c.agents = 500;
            c.eval.density = true;
            c
        }
        "fig9_mc_vs_q" => {
            let mut c = base(name, ExperimentKind::McVsQ);
            c.environments = envs(&["interval41({T})"]);
            c.grid.temperature = (1..=10).collect();
            c.eval.rollouts_per_agent = 100;
            c.eval.cutoff = 100_000;
            c.eval.mc_runs = 1_000_000;
            c
        }
        "table1" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&["interval41({T})"]);
            c.grid.temperature = (0..=10).collect();
            c.agents = 10_000;
            c
        }
        "table2_drift" => {
            let mut c = base(name, ExperimentKind::DriftGap);
            c.environments = drift_grid().into_iter().map(|(t, p)| format!("interval41_drift({t},{})", fmt_num(p))).collect();
            c.eval.mc_runs = 1_000_000;
            c.eval.threshold_ks = vec![-1, 0];
            c
        }
        "fig11_drift_trend" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&["interval41_drift(3,0.3)"]);
            c.algorithms = vec![Algorithm::QLearning, Algorithm::DoubleQ];
            c.grid.epsilon = vec![EpsilonSetting::Constant(0.1), EpsilonSetting::Schedule(EpsilonSchedule::decaying())];
            c.agents = 100;
            c.runs = 5;
            c.frames = 300_000;
            c.checkpoints = vec![10_000, 20_000, 50_000, 100_000, 150_000, 200_000, 250_000];
            c
        }
        "fig12_offline" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&["grid2d_L(3)"]);
            c.hyper.epsilon = 1.0;
            c.frames = 300_000;
            c.checkpoints = vec![5_000, 10_000, 20_000, 30_000, 50_000, 100_000, 200_000];
            c
        }
        "fig13_two_regions" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&["grid2d_two_regions(1,2)", "grid2d_two_regions(2,1)"]);
            c.agents = 500;
            c.eval.density = true;
            c
        }
        "fig14_algo_comparison" => {
            let mut c = base(name, ExperimentKind::Population);
            c.environments = envs(&["grid2d_L(3)"]);
            c.algorithms = Algorithm::ALL.to_vec();
            c.agents = 100;
            c.frames = 300_000;
            c.checkpoints = vec![10_000, 20_000, 50_000, 100_000, 150_000, 200_000, 250_000];
            c
        }
        "theory_validate" => {
            let mut c = base(name, ExperimentKind::Theory);
            c.agents = 0;
            c.frames = 0;
            c.eval.mc_runs = 1_000_000;
            c.eval.cross_validation_runs = 100_000;
            c
        }
        _ => return Err(Error::UnknownScenario(name.to_string())),
    };
    c.output = Some(format!("out/{name}").into());
    Ok(c)
}

/// Catalog of every preset, in listing order.
pub fn scenario_catalog() -> Vec<ExperimentConfig> {
    SCENARIOS.iter().map(|n| scenario(n).expect("preset is valid")).collect()
}
