use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heatgrid::harness::{checks, config_from_json, emit_report, run_experiment, scenario, scenarios, ExperimentConfig, Table};
use heatgrid::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_CHECK: u8 = 2;

#[derive(Parser)]
#[command(name = "heatgrid", version, about = "Heated gridworld experiments")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "HEATGRID_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunOpts {
    /// Output directory (default: the config's `output`, else out/<name>).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    force: bool,
    /// Evaluate the acceptance criteria covered by the results; exit 2 on failure.
    #[arg(long)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario or a JSON config (a previous manifest.json also works).
    Run {
        target: String,
        #[command(flatten)]
        opts: RunOpts,
        #[arg(long)]
        agents: Option<usize>,
        #[arg(long)]
        frames: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the scenario presets.
    ListScenarios,
    /// Run the absorbing-chain lemma suite.
    ValidateTheory {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Regenerate table1.csv and SVG heatmaps for a finished run.
    Report { dir: PathBuf },
}

fn load(target: &str) -> Result<ExperimentConfig, Error> {
    let path = Path::new(target);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig { path: target.to_string(), message: e.to_string() })?;
        config_from_json(&text)
    } else {
        scenario(target)
    }
}

fn print_failed_theory(results: &Table) {
    let failed: Vec<_> = results.rows.iter().filter(|r| results.text(r, "passed") == Some("false")).collect();
    let total = results.rows.len();
    println!("{}/{total} theory checks hold", total - failed.len());
    for r in failed {
        println!(
            "  failed: {} {} value={} bound={}",
            results.text(r, "check").unwrap_or(""),
            results.text(r, "subject").unwrap_or(""),
            results.f64(r, "value").map(heatgrid::harness::fmt_num).unwrap_or_default(),
            results.f64(r, "bound").map(heatgrid::harness::fmt_num).unwrap_or_default(),
        );
    }
}

fn execute_run(config: ExperimentConfig, opts: &RunOpts) -> Result<u8, Error> {
    let dir = opts.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out").join(&config.name));
    let summary = run_experiment(&config, &dir, opts.force)?;
    println!("wrote {} rows and {} files to {}", summary.results.rows.len(), summary.files.len(), dir.display());
    if config.kind == heatgrid::harness::ExperimentKind::Theory {
        print_failed_theory(&summary.results);
    }
    if !opts.check {
        return Ok(0);
    }
    let outcomes = checks::evaluate(&summary.results);
    if outcomes.is_empty() {
        println!("no acceptance criterion is covered by these results");
    }
    for o in &outcomes {
        println!("{o}");
    }
    Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { EXIT_CHECK })
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { target, opts, agents, frames, seed } => {
            let mut config = load(&target)?;
            if let Some(a) = agents {
                config.agents = a;
            }
            if let Some(f) = frames {
                config.frames = f;
                config.checkpoints.retain(|&c| c <= f);
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            config.validate()?;
            execute_run(config, &opts)
        }
        Command::ListScenarios => {
            for name in scenarios::SCENARIOS {
                println!("{name:<24} {}", scenarios::describe(name));
            }
            Ok(0)
        }
        Command::ValidateTheory { opts } => execute_run(scenario("theory_validate")?, &opts),
        Command::Report { dir } => {
            for p in emit_report(&dir)? {
                println!("wrote {}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
