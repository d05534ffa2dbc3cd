//! Solvers and verification tools for constant-order time-fractional
//! diffusion on rectangles, together with the reconstruction of the spatial
//! factor of a separated source term from noisy interior observations.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] — rectangle discretisation, nodal scalar/space-time fields,
//!   quadrature weights, and the separated source container.
//! * [`mlf`] — Mittag-Leffler evaluation and the relaxation kernel that
//!   powers the transform-based reference solver.
//! * [`operator`] — assembly of the diffusion operator, banded direct
//!   solves, and the generalised eigenbasis.
//! * [`stepper`] — fractional time stepping for the forward and adjoint
//!   initial-boundary value problems.
//! * [`spectral`] — eigenexpansion reference solver, Laplace-domain
//!   residual checks, and companion-source constructions.
//! * [`inverse`] — the regularised reconstruction loop, its gradient, and
//!   the invisible-source counterexample.
//!
//! All fallible operations return [`error::Result`] with a dedicated error
//! enumeration; numerical accuracy failures are reported, never silently
//! degraded.

pub mod error;
pub mod grid;
pub mod inverse;
pub mod mlf;
pub mod operator;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{Grid2D, ScalarField, SeparatedSource, SpaceTimeField, TimeGrid};
pub use inverse::{
    add_noise, gradient, invisible_source, objective, reconstruct, relative_error,
    ForwardContext, ReconstructionConfig, ReconstructionReport, StopReason,
};
pub use mlf::{duhamel_kernel, gamma, mittag_leffler, MlfParams};
pub use operator::{eigenpairs, EigenBasis, EllipticOperator, ShiftedSolver};
pub use spectral::{
    companion_lambda_cap, ip1prime_companion, laplace_residual_check,
    laplace_residual_from_transforms, laplace_transform_at, solve_forward_spectral,
    verify_c5_solution, CompanionSource, LaplaceProbe, SpectralSolution,
};
pub use stepper::{
    caputo_apply, caputo_apply_field, solve_adjoint, solve_forward, CaputoWeights, SourceTerm,
};
