//! Batch front end: configuration, solve and verification runs, reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod suites;

pub use config::{parse_config, Mode, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{Check, Relation, RunReport};
pub use run::{run, write_outputs, RunOutcome};
