//! Experiment drivers and I/O for the study suite.
//!
//! Three study types are supported, each with its own driver and report
//! rows:
//!
//! - [`drivers::run_kappa_sweep`]: solve on a fixed mesh at `kappa_j =
//!   kappa0 / 2^j` and tabulate the `H^1` distance between consecutive
//!   solutions. Row `j` is labeled `kappa_j` and carries the error
//!   `|x(kappa_{j+1}) - x(kappa_j)|`, so `halvings + 1` solves produce
//!   `halvings` rows.
//! - [`drivers::run_h_cauchy`]: solve on nested meshes `n, 2n, 4n, ...`
//!   with the coupling `kappa = h^q`, interpolate each coarse solution
//!   onto the next mesh, and stop when the successive `H^1` error drops
//!   below the Cauchy tolerance or the mesh budget runs out.
//! - [`drivers::run_force_sweep`]: solve a family of loads indexed by a
//!   nonnegative integer `ell` at fixed mesh and penalty, and tabulate
//!   contact area and constraint margins, optionally writing a VTK file
//!   of the deformed configuration per `ell`.
//!
//! Configuration is a JSON file ([`config::ExperimentConfig`]); every
//! report embeds the canonical config serialization and its SHA-256 so
//! CSV artifacts are traceable and byte-stable (wall time excepted).
//! [`validate::run_validation_suite`] is a self-check battery over both
//! problem modules used by the `validate` CLI subcommand.

pub mod config;
pub mod drivers;
pub mod export;
pub mod presets;
pub mod report;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig, ForcingSpec, ObstacleSpec, ProblemKind};
pub use drivers::{run_force_sweep, run_h_cauchy, run_kappa_sweep, ExperimentError};
pub use export::{csv_string, export_csv, export_vtk, stable_csv_bytes, vtk_string, VtkField};
pub use report::{ConvergenceReport, MeshStats};
pub use validate::{run_validation_suite, CheckResult};
