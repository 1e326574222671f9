//! Configuration, subcommands and output for the `softguide` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::{CliError, Result};

/// Environment variable that sets the number of worker threads.
pub const WORKERS_ENV: &str = "SOFTGUIDE_WORKERS";
