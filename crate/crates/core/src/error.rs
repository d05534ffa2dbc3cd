//! Error type shared by every solver module.
//!
//! Each variant corresponds to one failure contract of the public API:
//! invalid input parameters, numerical accuracy loss, assembly problems on a
//! specific grid node, linear-solver breakdown, eigensolver non-convergence,
//! per-step divergence of a time march, objective blow-up of the
//! reconstruction iteration, and near-singular divisions or pivots.

use std::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the solver crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition (bad range, non-finite
    /// value, mismatched shape, ...).
    Domain { what: String },
    /// A numerical routine could not reach its accuracy target.  Carries the
    /// evaluation regime that was attempted so failures are diagnosable.
    Accuracy { regime: &'static str, detail: String },
    /// Operator assembly rejected a coefficient value; names the grid node.
    Assembly { node: (usize, usize), reason: String },
    /// The linear solver broke down or stalled; carries the relative
    /// residual that was actually achieved.
    LinearSolve { achieved_residual: f64 },
    /// The eigensolver failed to converge the requested number of pairs;
    /// carries how many pairs did converge.
    Eigen { converged: usize, requested: usize },
    /// A time march produced a non-finite value; carries the step index.
    Divergence { step: usize },
    /// The reconstruction objective grew past its divergence guard; carries
    /// the objective history up to the failure.
    IterationDivergence { history: Vec<f64> },
    /// A division or factorization pivot was requested against a near-zero
    /// value; names the offending mode or matrix index.
    Conditioning { mode: usize, value: f64 },
}

impl Error {
    /// Convenience constructor for `Domain` errors.
    pub fn domain(what: impl Into<String>) -> Self {
        Error::Domain { what: what.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what } => write!(f, "domain error: {what}"),
            Error::Accuracy { regime, detail } => {
                write!(f, "accuracy loss in {regime} regime: {detail}")
            }
            Error::Assembly { node, reason } => {
                write!(f, "assembly error at node ({}, {}): {reason}", node.0, node.1)
            }
            Error::LinearSolve { achieved_residual } => {
                write!(f, "linear solve failed; achieved relative residual {achieved_residual:.3e}")
            }
            Error::Eigen { converged, requested } => {
                write!(f, "eigensolver converged only {converged} of {requested} requested pairs")
            }
            Error::Divergence { step } => {
                write!(f, "time march diverged (non-finite value) at step {step}")
            }
            Error::IterationDivergence { history } => write!(
                f,
                "reconstruction objective diverged after {} iterations (last {:.3e})",
                history.len(),
                history.last().copied().unwrap_or(f64::NAN)
            ),
            Error::Conditioning { mode, value } => write!(
                f,
                "near-singular value {value:.3e} at mode/index {mode}"
            ),
        }
    }
}

impl std::error::Error for Error {}
