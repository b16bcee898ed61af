//! Command-line front end: WAV and CSV I/O, configuration files and the
//! benchmark workloads.

pub mod bench;
pub mod commands;
pub mod config;
pub mod csv_out;
pub mod error;
pub mod wav;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
