//! `fracsource` binary: experiment runner and verification driver.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 for
//! configuration errors, 3 when the solver diverges.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use fracsource_cli::config::{preset, ExperimentConfig, PresetRun};
use fracsource_cli::experiment::{run_experiment, RunError};
use fracsource_cli::verify;

#[derive(Parser)]
#[command(
    name = "fracsource",
    version,
    about = "Time-fractional diffusion: forward solves and source reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a reconstruction experiment and write its artifacts.
    Run(RunArgs),
    /// Run verification suites (all of them when none are named).
    Verify {
        /// Suites to run: mlf, adjoint, laplace, spectral, invisible, c5.
        suites: Vec<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (flat `key = value` lines).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Named preset; multi-run presets write one subdirectory per run.
    #[arg(long)]
    preset: Option<String>,

    /// Override the fractional order.
    #[arg(long)]
    alpha: Option<f64>,

    /// Override the number of time steps.
    #[arg(long)]
    nt: Option<usize>,

    /// Override the grid ("64" or "64x48").
    #[arg(long)]
    grid: Option<String>,

    /// Override the relative noise level.
    #[arg(long)]
    noise: Option<f64>,

    /// Override the noise seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the Tikhonov weight.
    #[arg(long)]
    reg: Option<f64>,

    /// Override the relaxation constant.
    #[arg(long)]
    relax: Option<f64>,

    /// Override the stopping threshold.
    #[arg(long)]
    eps: Option<f64>,

    /// Override the observation region (frame(a,b) | corner(c) | strip(c) | all).
    #[arg(long)]
    region: Option<String>,

    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Run preset entries on this many worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Verify { suites } => cmd_verify(&suites),
    };
    std::process::exit(code);
}

fn cmd_verify(suites: &[String]) -> i32 {
    match verify::run_and_report(suites) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn cmd_run(args: &RunArgs) -> i32 {
    let runs = match assemble_runs(args) {
        Ok(runs) => runs,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return 2;
        }
    };
    let jobs = args.jobs.max(1).min(runs.len().max(1));
    let queue: Mutex<VecDeque<PresetRun>> = Mutex::new(runs.into());
    let failures: Mutex<Vec<(String, RunError)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let Some(run) = queue.lock().unwrap().pop_front() else {
                    break;
                };
                let dir = run.config.out.clone();
                match run_experiment(&run.config, &dir) {
                    Ok(metrics) => {
                        let res = metrics
                            .res
                            .map(|r| format!("{:.4}", r))
                            .unwrap_or_else(|| "n/a".into());
                        println!(
                            "{}: K = {}, res = {res}, stop = {}, wall = {:.1}s -> {}",
                            run.label,
                            metrics.iterations,
                            metrics.stop_reason,
                            metrics.wall_time_seconds,
                            dir.display()
                        );
                    }
                    Err(e) => {
                        eprintln!("{}: {e}", run.label);
                        failures.lock().unwrap().push((run.label, e));
                    }
                }
            });
        }
    });
    let failures = failures.into_inner().unwrap();
    // Divergence dominates the exit code; otherwise report the first
    // failure class encountered.
    if failures.is_empty() {
        0
    } else if failures.iter().any(|(_, e)| e.exit_code() == 3) {
        3
    } else {
        failures[0].1.exit_code()
    }
}

/// Expand the command line into concrete runs with overrides applied.
fn assemble_runs(args: &RunArgs) -> Result<Vec<PresetRun>, String> {
    let mut runs: Vec<PresetRun> = if let Some(name) = &args.preset {
        let mut runs = preset(name)?;
        // Preset entries land in subdirectories of the output base.
        let base = args.out.clone().unwrap_or_else(|| ExperimentConfig::default().out);
        for run in &mut runs {
            run.config.out = base.join(&run.label);
        }
        runs
    } else {
        let mut config = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &args.out {
            config.out = out.clone();
        }
        vec![PresetRun { label: "run".into(), config }]
    };
    for run in &mut runs {
        apply_overrides(&mut run.config, args)?;
        run.config.validate()?;
    }
    Ok(runs)
}

fn apply_overrides(config: &mut ExperimentConfig, args: &RunArgs) -> Result<(), String> {
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.nt {
        config.nt = v;
    }
    if let Some(v) = &args.grid {
        config.assign("grid", v)?;
    }
    if let Some(v) = args.noise {
        config.noise = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.reg {
        config.reg = v;
    }
    if let Some(v) = args.relax {
        config.relax = v;
    }
    if let Some(v) = args.eps {
        config.eps = v;
    }
    if let Some(v) = &args.region {
        config.region = v.parse()?;
    }
    Ok(())
}
