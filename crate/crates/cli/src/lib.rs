//! Command-line front end: configuration parsing, run orchestration and
//! reproducible artifacts.

pub mod config;
mod error;
pub mod manifest;
pub mod run;

pub use config::{parse_pairs, RunConfig};
pub use error::CliError;
pub use run::{run, Outcome};
