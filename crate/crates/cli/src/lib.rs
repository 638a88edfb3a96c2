//! Command-line front end: configuration, subcommand runners, report
//! rendering and the acceptance suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

pub use commands::{run, CheckKind, Command, ExpansionKind};
pub use config::{parse_config, Overrides, RunConfig};
pub use error::{CliError, CliResult};
