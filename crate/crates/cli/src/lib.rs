//! Command-line front end for the fractional-diffusion source solver.
//!
//! The binary exposes two commands:
//!
//! * `run` — execute a reconstruction experiment (custom configuration or
//!   a named preset) and write its artifacts: the manufactured and noisy
//!   observations, the target and reconstructed factors, run metrics, and
//!   a log.
//! * `verify` — run the built-in verification suites (special-function
//!   evaluator, adjoint duality, Laplace-domain residuals, spectral
//!   cross-check, invisible-source counterexample, product solutions) and
//!   report one pass/fail line per check.
//!
//! The configuration format and the artifact layouts are implemented in
//! the library modules so integration tests can drive them directly.

pub mod artifacts;
pub mod config;
pub mod experiment;
pub mod region;
pub mod verify;

pub use artifacts::{read_scalar_csv, read_spacetime_csv, write_scalar_csv, write_spacetime_csv, Metrics};
pub use config::{preset, ExperimentConfig, PresetRun, SigmaSpec, TargetSpec, PRESET_NAMES};
pub use experiment::{run_experiment, target_field, RunError};
pub use region::RegionSpec;
