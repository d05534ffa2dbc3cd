//! Cross-validation of the two independent forward solution paths: the
//! fractional time stepper marching the full grid against the truncated
//! eigenexpansion that integrates each mode's relaxation kernel exactly.
//! The two share nothing but the operator assembly, so agreement pins both
//! the convolution weights and the Mittag-Leffler evaluation at once.

use fracsource_core::{
    eigenpairs, solve_forward, solve_forward_spectral, EllipticOperator, Grid2D, ScalarField,
    SeparatedSource, SourceTerm, TimeGrid,
};

/// Temporal pulse concentrated inside the horizon.
fn pulse(t: f64) -> f64 {
    let s = 0.12;
    (-(t - 0.4) * (t - 0.4) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
}

/// Relative space-time L2 disagreement between the stepped and spectral
/// solutions, plus the spectral truncation tail for a fairness check.
fn disagreement(alpha: f64, nx: usize, modes: usize, nt: usize) -> (f64, f64) {
    let grid = Grid2D::unit_square(nx, nx).unwrap();
    let op = EllipticOperator::new(grid, 0.1, ScalarField::constant(grid, 1.0)).unwrap();
    let rho = ScalarField::constant(grid, 1.0);
    let basis = eigenpairs(&op, &rho, modes, 11).unwrap();
    let tg = TimeGrid::new(1.0, nt).unwrap();
    let g = ScalarField::from_fn(grid, |x, y| x + y + 1.0);
    let source = SeparatedSource::new(tg.sample(pulse), g, tg).unwrap();

    let spectral = solve_forward_spectral(&basis, &source, alpha, tg).unwrap();
    let stepped = solve_forward(&op, &rho, alpha, tg, SourceTerm::Separated(&source)).unwrap();

    let mut diff = stepped;
    for (d, s) in diff.snapshots.iter_mut().zip(&spectral.field.snapshots) {
        d.axpy(-1.0, s);
    }
    (diff.l2_norm() / spectral.field.l2_norm(), spectral.truncation_tail)
}

#[test]
fn stepper_and_eigenexpansion_agree_and_tighten_superdiffusive() {
    // The temporal pulse spans only ~8 steps at nt=64, so the coarse run
    // sits at the honest scheme-error level; the refined run must land
    // inside 1e-2 and show the expected contraction.
    let (coarse, tail) = disagreement(1.2, 24, 120, 64);
    assert!(tail < 5e-5, "truncation tail {tail:.3e} muddies the comparison");
    assert!(coarse <= 3e-2, "relative disagreement {coarse:.3e} at nt=64");
    let (fine, _) = disagreement(1.2, 24, 120, 128);
    assert!(fine <= 1e-2, "relative disagreement {fine:.3e} at nt=128");
    assert!(
        fine <= 0.7 * coarse,
        "no refinement gain: {coarse:.3e} -> {fine:.3e}"
    );
}

#[test]
fn stepper_and_eigenexpansion_agree_and_tighten_subdiffusive() {
    let (coarse, tail) = disagreement(0.5, 20, 80, 64);
    assert!(tail < 5e-5, "truncation tail {tail:.3e} muddies the comparison");
    assert!(coarse <= 1e-2, "relative disagreement {coarse:.3e} at nt=64");
    let (fine, _) = disagreement(0.5, 20, 80, 128);
    assert!(
        fine <= 0.7 * coarse,
        "no refinement gain: {coarse:.3e} -> {fine:.3e}"
    );
}
