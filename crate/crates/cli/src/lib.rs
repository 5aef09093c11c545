//! Command-line front end: scenario files, experiment commands and run
//! manifests.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod manifest;
pub mod run;

pub use config::{load_scenario, parse_scenario, ScenarioFile, BUNDLED_DEFAULT};
pub use error::{CliError, Result};
pub use manifest::RunManifest;
pub use run::{run_command, Command, FreqRange, Overrides, ScenarioSource};
