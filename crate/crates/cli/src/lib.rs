//! Command-line front end: configuration, orchestration of the numerical pipeline,
//! JSON reports and CSV traces.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run, Invocation, RunOutcome};
pub use config::{Command, RunConfig, CONFIG_SCHEMA, CONFIG_VERSION};
pub use error::CliError;
pub use report::Report;
