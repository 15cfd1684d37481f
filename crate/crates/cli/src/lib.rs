//! Library side of the `dsc` command-line tool: configuration, WAV I/O,
//! reports and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod wav;

pub use config::RunConfig;
pub use error::{CliError, Result};
