//! Integration checks of the fractional time stepper: manufactured
//! solutions (discrete-exact and continuum), and the continuum adjoint
//! pairing that the reconstruction gradient is built on.

use fracsource_core::{
    caputo_apply, gamma, solve_adjoint, solve_forward, EllipticOperator, Grid2D, ScalarField,
    SourceTerm, SpaceTimeField, TimeGrid,
};

/// Temporal factor used by the reconstruction experiments: a Gaussian
/// pulse centred well inside the horizon, negligible at both endpoints.
fn pulse(t: f64) -> f64 {
    let s = 0.12;
    (-(t - 0.4) * (t - 0.4) / (2.0 * s * s)).exp()
}

fn bump_field(grid: Grid2D) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| {
        (-((x - 0.55) * (x - 0.55) + (y - 0.45) * (y - 0.45)) / 0.04).exp()
    })
}

/// Builds the forcing whose discrete solution is exactly `beta(t_n) g`:
/// the time part uses the discrete Caputo derivative of the sampled
/// profile and the space part the discrete operator itself, so the march
/// must reproduce the product to linear-solver accuracy.
fn discrete_manufactured_source(
    op: &EllipticOperator,
    rho: &ScalarField,
    alpha: f64,
    timegrid: TimeGrid,
    beta: &[f64],
    g: &ScalarField,
) -> SpaceTimeField {
    let grid = op.grid();
    let dbeta = caputo_apply(alpha, timegrid, beta).unwrap();
    let ag = op.nodal_apply(g);
    let snaps = (0..=timegrid.nt)
        .map(|n| {
            let mut f = ScalarField::zeros(grid);
            for k in 0..grid.n_nodes() {
                f.values[k] = rho.values[k] * dbeta[n] * g.values[k] + beta[n] * ag.values[k];
            }
            f
        })
        .collect();
    SpaceTimeField::from_snapshots(timegrid, snaps).unwrap()
}

#[test]
fn manufactured_solution_is_reproduced_to_solver_accuracy() {
    let grid = Grid2D::unit_square(10, 9).unwrap();
    let tg = TimeGrid::new(1.0, 48).unwrap();
    let q = ScalarField::from_fn(grid, |x, y| 1.0 + 0.5 * x * y);
    let op = EllipticOperator::new(grid, 0.1, q).unwrap();
    let rho = ScalarField::from_fn(grid, |x, y| 1.0 + 0.25 * (x + y));
    let g = bump_field(grid);
    for alpha in [0.6, 1.0, 1.5, 2.0] {
        let beta = tg.sample(|t| t * t);
        let f = discrete_manufactured_source(&op, &rho, alpha, tg, &beta, &g);
        let u = solve_forward(&op, &rho, alpha, tg, SourceTerm::Snapshots(&f)).unwrap();
        let mut err = 0.0_f64;
        for (snap, &b) in u.snapshots.iter().zip(&beta) {
            for (&uv, &gv) in snap.values.iter().zip(&g.values) {
                err = err.max((uv - b * gv).abs());
            }
        }
        assert!(err < 1e-9, "alpha = {alpha}: discrete manufactured error {err:.3e}");
    }
}

#[test]
fn time_error_decays_at_the_scheme_order() {
    // With the exact continuum Caputo derivative of t^2 in the forcing,
    // the only error left is the L1 truncation O(tau^{2 - alpha}).
    let grid = Grid2D::unit_square(9, 9).unwrap();
    let q = ScalarField::constant(grid, 1.0);
    let op = EllipticOperator::new(grid, 0.1, q).unwrap();
    let rho = ScalarField::constant(grid, 1.0);
    let g = bump_field(grid);
    let ag = op.nodal_apply(&g);
    let alpha = 0.5;
    let dt2 = |t: f64| 2.0 / gamma(2.5) * t.powf(1.5);

    let mut errors = Vec::new();
    for nt in [32usize, 64] {
        let tg = TimeGrid::new(1.0, nt).unwrap();
        let snaps = (0..=nt)
            .map(|n| {
                let t = tg.node(n);
                let mut f = ScalarField::zeros(grid);
                for k in 0..grid.n_nodes() {
                    f.values[k] = rho.values[k] * dt2(t) * g.values[k] + t * t * ag.values[k];
                }
                f
            })
            .collect();
        let f = SpaceTimeField::from_snapshots(tg, snaps).unwrap();
        let u = solve_forward(&op, &rho, alpha, tg, SourceTerm::Snapshots(&f)).unwrap();
        let mut err = 0.0_f64;
        for k in 0..grid.n_nodes() {
            err = err.max((u.snapshots[nt].values[k] - g.values[k]).abs());
        }
        errors.push(err);
    }
    let ratio = errors[0] / errors[1];
    assert!(
        ratio > 2.2 && ratio < 3.6,
        "expected ~2^1.5 error reduction, got {ratio} from {errors:?}"
    );
}

#[test]
fn adjoint_pairing_converges_to_the_continuum_functional() {
    // The reconstruction gradient pairs the adjoint state z of the
    // trapezoid-weighted weight r = sigma(t) h(x) against sigma:
    //   P = sum_n sigma_n (g, M z^n).
    // By transpose-exactness P equals the trapezoid quadrature of
    // int (u, sigma h) dt, so it must converge to the continuum duality
    // value int sigma (g, w) dt at the scheme order as the time grid is
    // refined.  A reversal or weight-placement bug would destroy the
    // convergence, not merely perturb constants.
    let grid = Grid2D::unit_square(16, 16).unwrap();
    let q = ScalarField::constant(grid, 1.0);
    let op = EllipticOperator::new(grid, 0.1, q).unwrap();
    let rho = ScalarField::constant(grid, 1.0);
    let g = bump_field(grid);
    let h = ScalarField::from_fn(grid, |x, y| {
        (-((x - 0.5) * (x - 0.5) + (y - 0.55) * (y - 0.55)) / 0.05).exp()
    });
    let alpha = 1.5;

    let pairing = |nt: usize| -> f64 {
        let tg = TimeGrid::new(1.0, nt).unwrap();
        let sigma = tg.sample(pulse);
        let tau = tg.tau();
        let weighted = SpaceTimeField::from_snapshots(
            tg,
            (0..=nt)
                .map(|n| {
                    let mut w = h.clone();
                    for (v, m) in w.values.iter_mut().zip(op.mass()) {
                        *v *= tau * tg.trap_weight(n) * sigma[n] * m;
                    }
                    w
                })
                .collect(),
        )
        .unwrap();
        let z = solve_adjoint(&op, &rho, alpha, tg, &weighted).unwrap();
        (0..=nt).map(|n| sigma[n] * g.l2_inner(&z.snapshots[n])).sum()
    };

    let reference = pairing(1024);
    let coarse = (pairing(64) - reference).abs();
    let fine = (pairing(128) - reference).abs();
    assert!(
        coarse < 6e-2 * reference.abs(),
        "pairing defect {coarse:.3e} against reference {reference:.6e}"
    );
    assert!(
        fine < coarse / 1.7,
        "defect should shrink at the scheme order: {coarse:.3e} -> {fine:.3e}"
    );
}
