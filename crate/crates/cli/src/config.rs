//! Experiment configuration: a flat `key = value` text format that
//! round-trips exactly (serialise, re-parse, compare equal), plus the named
//! presets for the benchmark experiments.
//!
//! The format is deliberately minimal: one assignment per line, `#` starts
//! a comment, keys are fixed.  Floating-point values are printed with
//! Rust's shortest round-trip formatting, so the round-trip is bit exact.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::region::RegionSpec;

/// Temporal factor of the separated source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSpec {
    /// Normalised Gaussian pulse `exp(-(t-center)^2 / (2 width^2)) /
    /// (sqrt(2 pi) width)`.
    Gauss { center: f64, width: f64 },
}

impl SigmaSpec {
    pub fn sample(&self, t: f64) -> f64 {
        match *self {
            SigmaSpec::Gauss { center, width } => {
                let z = (t - center) / width;
                (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * width)
            }
        }
    }
}

impl fmt::Display for SigmaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SigmaSpec::Gauss { center, width } => write!(f, "gauss({center},{width})"),
        }
    }
}

impl FromStr for SigmaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let body = s
            .strip_prefix("gauss(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("sigma '{s}' is not gauss(center,width)"))?;
        let nums: Vec<f64> = body
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| format!("sigma '{s}': {e}")))
            .collect::<Result<_, _>>()?;
        match nums.as_slice() {
            [center, width] if *width > 0.0 && center.is_finite() => {
                Ok(SigmaSpec::Gauss { center: *center, width: *width })
            }
            _ => Err(format!("sigma '{s}' needs a finite center and a positive width")),
        }
    }
}

/// Spatial factor used to manufacture the data (the reconstruction target).
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// `x + y + 1`.
    Plane,
    /// `cos(pi x) cos(pi y) + 2`.
    Cosine,
    /// Values loaded from a scalar-field CSV (same layout `g_true.csv` is
    /// written in); the header must match the configured grid.
    File(PathBuf),
}

impl TargetSpec {
    /// Pointwise value for the analytic variants; `None` for file-backed
    /// targets, which are materialised by the experiment runner.
    pub fn evaluate(&self, x: f64, y: f64) -> Option<f64> {
        use std::f64::consts::PI;
        match self {
            TargetSpec::Plane => Some(x + y + 1.0),
            TargetSpec::Cosine => Some((PI * x).cos() * (PI * y).cos() + 2.0),
            TargetSpec::File(_) => None,
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::Plane => write!(f, "plane"),
            TargetSpec::Cosine => write!(f, "cosine"),
            TargetSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for TargetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "plane" => Ok(TargetSpec::Plane),
            "cosine" => Ok(TargetSpec::Cosine),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(TargetSpec::File(PathBuf::from(path))),
                _ => Err(format!("g_true '{other}' is not plane, cosine, or file:<path>")),
            },
        }
    }
}

/// Complete description of one reconstruction experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Fractional order of the time derivative, in (0, 2].
    pub alpha: f64,
    /// Final time.
    pub t_end: f64,
    /// Grid nodes per direction.
    pub nx: usize,
    pub ny: usize,
    /// Number of time steps.
    pub nt: usize,
    /// Constant diffusion coefficient of the elliptic part.
    pub diffusion: f64,
    /// Constant zero-order coefficient.
    pub potential: f64,
    /// Constant weight in front of the time derivative.
    pub density: f64,
    /// Temporal source factor.
    pub sigma: SigmaSpec,
    /// Spatial source factor used to manufacture the observations.
    pub g_true: TargetSpec,
    /// Constant initial guess for the iteration.
    pub g0: f64,
    /// Observation region.
    pub region: RegionSpec,
    /// Tikhonov weight.
    pub reg: f64,
    /// Relaxation constant of the fixed-point update.
    pub relax: f64,
    /// Relative stopping threshold.
    pub eps: f64,
    /// Iteration budget.
    pub max_iter: usize,
    /// Relative multiplicative noise level on the observations.
    pub noise: f64,
    /// Seed for the noise stream.
    pub seed: u64,
    /// Manufacture the data on a grid with twice the resolution and sample
    /// it back, so the observations do not come from the inversion mesh.
    pub fine_data: bool,
    /// Output directory for artifacts.
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: 1.2,
            t_end: 1.0,
            nx: 64,
            ny: 64,
            nt: 256,
            diffusion: 0.1,
            potential: 1.0,
            density: 1.0,
            sigma: SigmaSpec::Gauss { center: 0.4, width: 0.12 },
            g_true: TargetSpec::Plane,
            g0: 2.0,
            region: RegionSpec::Frame { a: 0.1, b: 0.9 },
            reg: 1e-5,
            relax: 4.0,
            eps: 4e-4,
            max_iter: 2000,
            noise: 0.02,
            seed: 1234,
            fine_data: false,
            out: PathBuf::from("fracsource-out"),
        }
    }
}

impl ExperimentConfig {
    /// Canonical text form; `parse` of this text reproduces the config
    /// exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        use fmt::Write;
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "t_end = {}", self.t_end);
        let _ = writeln!(s, "grid = {}x{}", self.nx, self.ny);
        let _ = writeln!(s, "nt = {}", self.nt);
        let _ = writeln!(s, "diffusion = {}", self.diffusion);
        let _ = writeln!(s, "potential = {}", self.potential);
        let _ = writeln!(s, "density = {}", self.density);
        let _ = writeln!(s, "sigma = {}", self.sigma);
        let _ = writeln!(s, "g_true = {}", self.g_true);
        let _ = writeln!(s, "g0 = {}", self.g0);
        let _ = writeln!(s, "region = {}", self.region);
        let _ = writeln!(s, "reg = {}", self.reg);
        let _ = writeln!(s, "relax = {}", self.relax);
        let _ = writeln!(s, "eps = {}", self.eps);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "noise = {}", self.noise);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "fine_data = {}", self.fine_data);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    /// Parse the flat `key = value` format, starting from defaults so a
    /// partial file is valid.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            cfg.assign(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assign one key; used both by the file parser and by command-line
    /// overrides.
    pub fn assign(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            value.parse::<T>().map_err(|e| format!("{key} '{value}': {e}"))
        }
        match key {
            "alpha" => self.alpha = num(key, value)?,
            "t_end" => self.t_end = num(key, value)?,
            "grid" => {
                let (nx, ny) = parse_grid(value)?;
                self.nx = nx;
                self.ny = ny;
            }
            "nt" => self.nt = num(key, value)?,
            "diffusion" => self.diffusion = num(key, value)?,
            "potential" => self.potential = num(key, value)?,
            "density" => self.density = num(key, value)?,
            "sigma" => self.sigma = value.parse()?,
            "g_true" => self.g_true = value.parse()?,
            "g0" => self.g0 = num(key, value)?,
            "region" => self.region = value.parse()?,
            "reg" => self.reg = num(key, value)?,
            "relax" => self.relax = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "noise" => self.noise = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "fine_data" => self.fine_data = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Cheap structural checks; the solver performs its own validation of
    /// the numerical parameters it consumes.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(format!("alpha = {} is outside (0, 2]", self.alpha));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(format!("t_end = {} must be positive and finite", self.t_end));
        }
        if self.nx < 3 || self.ny < 3 {
            return Err(format!("grid {}x{} needs at least 3 nodes per direction", self.nx, self.ny));
        }
        if self.nt < 2 {
            return Err(format!("nt = {} needs at least 2 steps", self.nt));
        }
        if !(self.diffusion.is_finite() && self.diffusion > 0.0) {
            return Err(format!("diffusion = {} must be positive and finite", self.diffusion));
        }
        if !(self.potential.is_finite() && self.potential >= 0.0) {
            return Err(format!("potential = {} must be nonnegative and finite", self.potential));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(format!("density = {} must be positive and finite", self.density));
        }
        if !self.g0.is_finite() {
            return Err(format!("g0 = {} must be finite", self.g0));
        }
        let SigmaSpec::Gauss { center, width } = self.sigma;
        if !(center.is_finite() && width.is_finite() && width > 0.0) {
            return Err(format!("sigma = {} needs a finite center and a positive width", self.sigma));
        }
        if !(self.reg.is_finite() && self.reg > 0.0) {
            return Err(format!("reg = {} must be positive and finite", self.reg));
        }
        if !(self.relax.is_finite() && self.relax > 0.0) {
            return Err(format!("relax = {} must be positive and finite", self.relax));
        }
        if !(self.eps.is_finite() && self.eps > 0.0 && self.eps < 1.0) {
            return Err(format!("eps = {} is outside (0, 1)", self.eps));
        }
        if self.max_iter == 0 {
            return Err("max_iter must be positive".into());
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(format!("noise = {} must be nonnegative", self.noise));
        }
        Ok(())
    }
}

fn parse_grid(value: &str) -> Result<(usize, usize), String> {
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("grid '{value}': {e}"))
    };
    match value.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(value)?;
            Ok((n, n))
        }
    }
}

/// One run of a preset: a label (used as the artifact subdirectory) and
/// the full configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    pub label: String,
    pub config: ExperimentConfig,
}

/// Names of all built-in presets, in a stable order.
pub const PRESET_NAMES: [&str; 7] = [
    "example1-a12",
    "example1-a18",
    "example1-a12-cosine",
    "example1-a18-cosine",
    "example2-sweep",
    "example3-extremes",
    "example3-T4",
];

/// Expand a preset name into its runs.  Multi-run presets (the region
/// sweep, the order extremes) return one entry per run.
pub fn preset(name: &str) -> Result<Vec<PresetRun>, String> {
    let base = ExperimentConfig::default();
    let ex1 = |alpha: f64, g_true: TargetSpec, label: &str| PresetRun {
        label: label.to_string(),
        config: ExperimentConfig { alpha, g_true, ..base.clone() },
    };
    match name {
        "example1-a12" => Ok(vec![ex1(1.2, TargetSpec::Plane, "example1-a12")]),
        "example1-a18" => Ok(vec![ex1(1.8, TargetSpec::Plane, "example1-a18")]),
        "example1-a12-cosine" => {
            Ok(vec![ex1(1.2, TargetSpec::Cosine, "example1-a12-cosine")])
        }
        "example1-a18-cosine" => {
            Ok(vec![ex1(1.8, TargetSpec::Cosine, "example1-a18-cosine")])
        }
        "example2-sweep" => {
            // Six observation regions, ordered from richest to poorest.
            let regions: [(&str, RegionSpec); 6] = [
                ("frame-wide", RegionSpec::Frame { a: 0.2, b: 0.8 }),
                ("frame-thin", RegionSpec::Frame { a: 0.05, b: 0.95 }),
                ("corner-wide", RegionSpec::Corner { c: 0.8 }),
                ("corner-thin", RegionSpec::Corner { c: 0.95 }),
                ("strip-wide", RegionSpec::Strip { c: 0.8 }),
                ("strip-thin", RegionSpec::Strip { c: 0.95 }),
            ];
            Ok(regions
                .iter()
                .map(|&(tag, region)| PresetRun {
                    label: format!("example2-{tag}"),
                    config: ExperimentConfig {
                        alpha: 1.5,
                        g_true: TargetSpec::Cosine,
                        region,
                        noise: 0.10,
                        eps: 1e-3,
                        ..base.clone()
                    },
                })
                .collect())
        }
        "example3-extremes" => {
            // Orders close to the classical limits; tighter stopping
            // thresholds keep the iteration going despite the slow tail.
            let runs = [(0.99, 2e-4), (1.01, 2e-4), (1.99, 4.0 / 150_000.0), (2.0, 4.0 / 150_000.0)];
            Ok(runs
                .iter()
                .map(|&(alpha, eps)| PresetRun {
                    label: format!("example3-a{}", alpha.to_string().replace('.', "")),
                    config: ExperimentConfig {
                        alpha,
                        eps,
                        g_true: TargetSpec::Cosine,
                        noise: 0.04,
                        nx: 48,
                        ny: 48,
                        nt: 192,
                        ..base.clone()
                    },
                })
                .collect())
        }
        "example3-T4" => {
            // Same extreme orders, longer horizon: the damping has time to
            // act and the reconstruction sharpens by an order of magnitude.
            let runs = [(1.99, 4.0 / 150_000.0), (2.0, 4.0 / 150_000.0)];
            Ok(runs
                .iter()
                .map(|&(alpha, eps)| PresetRun {
                    label: format!("example3-T4-a{}", alpha.to_string().replace('.', "")),
                    config: ExperimentConfig {
                        alpha,
                        eps,
                        g_true: TargetSpec::Cosine,
                        noise: 0.04,
                        t_end: 4.0,
                        nx: 48,
                        ny: 48,
                        nt: 768,
                        ..base.clone()
                    },
                })
                .collect())
        }
        other => Err(format!(
            "unknown preset '{other}' (available: {})",
            PRESET_NAMES.join(", ")
        )),
    }
}
