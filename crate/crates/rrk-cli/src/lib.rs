//! Command-line front end for the relaxation Runge-Kutta solver: config
//! parsing, experiment drivers, error norms, and CSV emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csvio;
pub mod drivers;
pub mod norms;

pub use config::{apply_override, load_config, resolve, CliError, CliResult, RunConfig};
