//! File formats and subcommands behind the `faultsense` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod eval;
pub mod io;

pub use config::AppConfig;
pub use error::CliError;
