//! File artifacts of an experiment run: scalar and space-time fields as
//! CSV, run metrics as JSON, and a plain-text log.
//!
//! CSV layout: the first line holds the shape (`nx,ny` for a scalar field,
//! `nx,ny,nt` for a trajectory), then the values row-major, one grid row
//! per line.  Trajectories write one snapshot per block with a blank line
//! between blocks.  Values use shortest round-trip formatting, so reading
//! a file back reproduces the bits that were written.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use fracsource_core::{Grid2D, ScalarField, SpaceTimeField, TimeGrid};

/// Write a scalar field as CSV.
pub fn write_scalar_csv(path: &Path, field: &ScalarField) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let grid = field.grid;
    writeln!(w, "{},{}", grid.nx, grid.ny)?;
    write_rows(&mut w, grid, &field.values)?;
    w.flush()
}

/// Write a trajectory as CSV, one snapshot block per time level.
pub fn write_spacetime_csv(path: &Path, field: &SpaceTimeField) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let grid = field.grid();
    writeln!(w, "{},{},{}", grid.nx, grid.ny, field.timegrid.nt)?;
    for (n, snapshot) in field.snapshots.iter().enumerate() {
        if n > 0 {
            writeln!(w)?;
        }
        write_rows(&mut w, grid, &snapshot.values)?;
    }
    w.flush()
}

fn write_rows<W: Write>(w: &mut W, grid: Grid2D, values: &[f64]) -> io::Result<()> {
    for row in values.chunks(grid.nx) {
        let mut line = String::new();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Read a scalar-field CSV written by [`write_scalar_csv`].
pub fn read_scalar_csv(path: &Path) -> Result<ScalarField, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| format!("{}: empty file", path.display()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|e| format!("{}: header: {e}", path.display())))
        .collect::<Result<_, _>>()?;
    let [nx, ny] = dims.as_slice() else {
        return Err(format!("{}: header '{header}' is not nx,ny", path.display()));
    };
    let grid = Grid2D::unit_square(*nx, *ny).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut values = Vec::with_capacity(nx * ny);
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        for v in line.split(',') {
            values.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("{}: value '{v}': {e}", path.display()))?,
            );
        }
    }
    if values.len() != nx * ny {
        return Err(format!(
            "{}: expected {} values for a {nx}x{ny} field, found {}",
            path.display(),
            nx * ny,
            values.len()
        ));
    }
    ScalarField::from_values(grid, values).map_err(|e| format!("{}: {e}", path.display()))
}

/// Read a trajectory CSV written by [`write_spacetime_csv`].
pub fn read_spacetime_csv(path: &Path, t_end: f64) -> Result<SpaceTimeField, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| format!("{}: empty file", path.display()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|e| format!("{}: header: {e}", path.display())))
        .collect::<Result<_, _>>()?;
    let [nx, ny, nt] = dims.as_slice() else {
        return Err(format!("{}: header '{header}' is not nx,ny,nt", path.display()));
    };
    let grid = Grid2D::unit_square(*nx, *ny).map_err(|e| format!("{}: {e}", path.display()))?;
    let timegrid = TimeGrid::new(t_end, *nt).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut snapshots = Vec::with_capacity(nt + 1);
    let mut values: Vec<f64> = Vec::with_capacity(nx * ny);
    let mut finish = |values: &mut Vec<f64>| -> Result<(), String> {
        if values.is_empty() {
            return Ok(());
        }
        if values.len() != nx * ny {
            return Err(format!(
                "{}: snapshot {} has {} values, expected {}",
                path.display(),
                snapshots.len(),
                values.len(),
                nx * ny
            ));
        }
        let field = ScalarField::from_values(grid, std::mem::take(values))
            .map_err(|e| format!("{}: {e}", path.display()))?;
        snapshots.push(field);
        Ok(())
    };
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            finish(&mut values)?;
            continue;
        }
        for v in line.split(',') {
            values.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("{}: value '{v}': {e}", path.display()))?,
            );
        }
    }
    finish(&mut values)?;
    SpaceTimeField::from_snapshots(timegrid, snapshots).map_err(|e| format!("{}: {e}", path.display()))
}

/// Run metrics persisted as `metrics.json`.  Everything except
/// `wall_time_seconds` is deterministic for a fixed configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics {
    /// Number of iterations performed.
    pub iterations: usize,
    /// Relative error of the reconstruction against the target.
    pub res: Option<f64>,
    /// Why the iteration stopped: "converged" or "max_iter".
    pub stop_reason: String,
    /// Objective value after each iteration.
    pub phi_history: Vec<f64>,
    /// Noise seed actually used.
    pub seed: u64,
    /// Canonical text of the configuration; re-parses to the exact config.
    pub config: String,
    /// Wall-clock duration of the run in seconds.
    pub wall_time_seconds: f64,
}

impl Metrics {
    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        fs::write(path, body)
    }

    pub fn read(path: &Path) -> Result<Metrics, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Incremental plain-text run log.
pub struct RunLog {
    writer: BufWriter<fs::File>,
}

impl RunLog {
    pub fn create(path: &Path) -> io::Result<RunLog> {
        Ok(RunLog { writer: BufWriter::new(fs::File::create(path)?) })
    }

    pub fn line(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.writer, "{text}")?;
        self.writer.flush()
    }
}
