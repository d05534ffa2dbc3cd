//! End-to-end experiment runner: manufacture observations for a known
//! source, perturb them with noise, reconstruct the spatial factor, and
//! persist the artifacts (`u_true.csv`, `u_noisy.csv`, `g_true.csv`,
//! `g_recon.csv`, `metrics.json`, `run.log`).

use std::fmt;
use std::io;
use std::path::Path;
use std::time::Instant;

use fracsource_core::{
    add_noise, reconstruct, solve_forward, Error, ForwardContext, Grid2D, ReconstructionConfig,
    ScalarField, SeparatedSource, SourceTerm, SpaceTimeField, StopReason, TimeGrid,
};
use fracsource_core::EllipticOperator;

use crate::artifacts::{read_scalar_csv, write_scalar_csv, write_spacetime_csv, Metrics, RunLog};
use crate::config::{ExperimentConfig, TargetSpec};

/// Failure modes of a run, split by the exit code they map to.
#[derive(Debug)]
pub enum RunError {
    /// Invalid configuration or input data (exit code 2).
    Config(String),
    /// Filesystem problem while writing artifacts (exit code 2).
    Io(String),
    /// The solver or the reconstruction iteration diverged (exit code 3).
    Divergence(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Divergence(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
            RunError::Divergence(m) => write!(f, "solver divergence: {m}"),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Divergence { .. } | Error::IterationDivergence { .. } => {
                RunError::Divergence(e.to_string())
            }
            other => RunError::Config(other.to_string()),
        }
    }
}

/// Materialise the target factor on the grid.
pub fn target_field(grid: Grid2D, target: &TargetSpec) -> Result<ScalarField, RunError> {
    match target {
        TargetSpec::File(path) => {
            let field = read_scalar_csv(path).map_err(RunError::Config)?;
            if field.grid != grid {
                return Err(RunError::Config(format!(
                    "g_true file is {}x{} but the configured grid is {}x{}",
                    field.grid.nx, field.grid.ny, grid.nx, grid.ny
                )));
            }
            Ok(field)
        }
        analytic => Ok(ScalarField::from_fn(grid, |x, y| {
            analytic.evaluate(x, y).expect("analytic target")
        })),
    }
}

/// Solve the forward problem that manufactures the observations.  With
/// `fine_data` the solve happens on a grid with doubled resolution and is
/// sampled back at the coincident nodes, so the data do not come from the
/// mesh the inversion runs on.
fn manufacture_data(
    config: &ExperimentConfig,
    grid: Grid2D,
    timegrid: TimeGrid,
    sigma: &[f64],
    g_true: &ScalarField,
) -> Result<SpaceTimeField, RunError> {
    if !config.fine_data {
        let op = build_operator(config, grid)?;
        let rho = ScalarField::constant(grid, config.density);
        let source = SeparatedSource::new(sigma.to_vec(), g_true.clone(), timegrid)?;
        return Ok(solve_forward(&op, &rho, config.alpha, timegrid, SourceTerm::Separated(&source))?);
    }
    // Doubling nx-1 intervals puts a fine node on every coarse node.
    let fine_grid = Grid2D::unit_square(2 * grid.nx - 1, 2 * grid.ny - 1)
        .map_err(|e| RunError::Config(e.to_string()))?;
    let op = build_operator(config, fine_grid)?;
    let rho = ScalarField::constant(fine_grid, config.density);
    let g_fine = target_field(fine_grid, &refine_target(config)?)?;
    let source = SeparatedSource::new(sigma.to_vec(), g_fine, timegrid)?;
    let u_fine = solve_forward(&op, &rho, config.alpha, timegrid, SourceTerm::Separated(&source))?;
    let mut snapshots = Vec::with_capacity(u_fine.snapshots.len());
    for snap in &u_fine.snapshots {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(snap.values[2 * j * fine_grid.nx + 2 * i]);
            }
        }
        snapshots.push(ScalarField::from_values(grid, values)?);
    }
    Ok(SpaceTimeField::from_snapshots(timegrid, snapshots)?)
}

/// File-backed targets cannot be refined onto the doubled grid.
fn refine_target(config: &ExperimentConfig) -> Result<TargetSpec, RunError> {
    match &config.g_true {
        TargetSpec::File(_) => Err(RunError::Config(
            "fine_data requires an analytic g_true (plane or cosine)".into(),
        )),
        analytic => Ok(analytic.clone()),
    }
}

fn build_operator(config: &ExperimentConfig, grid: Grid2D) -> Result<EllipticOperator, RunError> {
    let potential = ScalarField::constant(grid, config.potential);
    Ok(EllipticOperator::new(grid, config.diffusion, potential)?)
}

/// Run one experiment and write its artifacts into `dir`.
///
/// The observation artifacts are written before the reconstruction starts,
/// so a diverging run still leaves the data on disk for inspection.
pub fn run_experiment(config: &ExperimentConfig, dir: &Path) -> Result<Metrics, RunError> {
    config.validate().map_err(RunError::Config)?;
    std::fs::create_dir_all(dir)?;
    let mut log = RunLog::create(&dir.join("run.log"))?;
    log.line("experiment configuration:")?;
    for line in config.to_text().lines() {
        log.line(&format!("  {line}"))?;
    }

    let started = Instant::now();
    let grid = Grid2D::unit_square(config.nx, config.ny)?;
    let timegrid = TimeGrid::new(config.t_end, config.nt)?;
    let sigma = timegrid.sample(|t| config.sigma.sample(t));
    let g_true = target_field(grid, &config.g_true)?;

    let u_true = manufacture_data(config, grid, timegrid, &sigma, &g_true)?;
    log.line(&format!(
        "data: |u_true| = {:.6e} over {} snapshots (fine_data = {})",
        u_true.l2_norm(),
        u_true.snapshots.len(),
        config.fine_data
    ))?;
    write_spacetime_csv(&dir.join("u_true.csv"), &u_true)?;
    write_scalar_csv(&dir.join("g_true.csv"), &g_true)?;

    let u_obs = add_noise(&u_true, config.noise, config.seed);
    write_spacetime_csv(&dir.join("u_noisy.csv"), &u_obs)?;
    log.line(&format!("noise: delta = {}, seed = {}", config.noise, config.seed))?;

    let op = build_operator(config, grid)?;
    let rho = ScalarField::constant(grid, config.density);
    let ctx = ForwardContext::new(&op, &rho, config.alpha, timegrid)?;
    let mut rc = ReconstructionConfig::new(config.region.mask(grid));
    rc.tikhonov_weight = config.reg;
    rc.relax = config.relax;
    rc.stop_eps = config.eps;
    rc.max_iter = config.max_iter;
    rc.noise_delta = config.noise;
    rc.rng_seed = config.seed;
    let g0 = ScalarField::constant(grid, config.g0);

    let report = reconstruct(&ctx, &sigma, &u_obs, &g0, &rc, Some(&g_true)).map_err(|e| {
        let converted: RunError = e.into();
        if let RunError::Divergence(msg) = &converted {
            let _ = log.line(&format!("ABORT: {msg}"));
        }
        converted
    })?;

    write_scalar_csv(&dir.join("g_recon.csv"), &report.g_final)?;
    for (k, phi) in report.objective_history.iter().enumerate() {
        log.line(&format!("iter {k}: phi = {phi:.9e}"))?;
    }
    let stop_reason = match report.stop_reason {
        StopReason::Converged => "converged",
        StopReason::MaxIter => "max_iter",
    };
    let wall_time = started.elapsed().as_secs_f64();
    log.line(&format!(
        "done: K = {}, stop = {stop_reason}, res = {:?}, wall = {wall_time:.2}s",
        report.iterations, report.res
    ))?;

    let metrics = Metrics {
        iterations: report.iterations,
        res: report.res,
        stop_reason: stop_reason.to_string(),
        phi_history: report.objective_history.clone(),
        seed: config.seed,
        config: config.to_text(),
        wall_time_seconds: wall_time,
    };
    metrics.write(&dir.join("metrics.json"))?;
    Ok(metrics)
}
