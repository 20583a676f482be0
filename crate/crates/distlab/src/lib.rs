//! Command-line front end for `distlab-core`.
//!
//! Every subcommand produces a [`Report`]: a versioned JSON envelope holding
//! one payload and a manifest of the invocation. Identical arguments, inputs
//! and tool version give byte-identical output unless `--timestamps` is set.

mod cli;
pub mod report;

pub use cli::{run, run_with_tol, Outcome, TOL_ENV};
pub use report::{summarize, Counterexample, Payload, Report, RunManifest, UnknownSchema, SCHEMA_VERSION};
