//! Shared helpers for the benchmark suite (fixtures live here so the
//! criterion targets stay small).

use fracsource_core::{
    EllipticOperator, Grid2D, ScalarField, SeparatedSource, SpaceTimeField, TimeGrid,
};

/// Standard operator fixture: unit square, diffusion 0.1, potential 1.
pub fn operator(n: usize) -> (EllipticOperator, ScalarField) {
    let grid = Grid2D::unit_square(n, n).expect("fixture grid");
    let op = EllipticOperator::new(grid, 0.1, ScalarField::constant(grid, 1.0))
        .expect("fixture operator");
    let rho = ScalarField::constant(grid, 1.0);
    (op, rho)
}

/// Gaussian-pulse separated source on the fixture grid.
pub fn pulse_source(grid: Grid2D, timegrid: TimeGrid) -> SeparatedSource {
    let sigma = timegrid.sample(|t| {
        let z = (t - 0.4) / 0.12;
        (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * 0.12)
    });
    let g = ScalarField::from_fn(grid, |x, y| x + y + 1.0);
    SeparatedSource::new(sigma, g, timegrid).expect("fixture source")
}

/// Deterministic space-time load for adjoint and observation fixtures.
pub fn wavy_field(grid: Grid2D, timegrid: TimeGrid) -> SpaceTimeField {
    let snaps: Vec<ScalarField> = (0..=timegrid.nt)
        .map(|n| {
            ScalarField::from_fn(grid, |x, y| (0.37 * n as f64 + 1.3 * x + 2.1 * y).sin())
        })
        .collect();
    SpaceTimeField::from_snapshots(timegrid, snaps).expect("fixture field")
}
