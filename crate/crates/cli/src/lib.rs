//! Command-line driver: configuration, command dispatch and CSV/JSON emission.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Built, Config};
pub use error::{CliError, CliResult};
pub use output::{Cell, Output, Table};
