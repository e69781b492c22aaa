//! Pipeline commands behind the `qae` binary: preprocessing, synthetic data,
//! training, evaluation and comparison.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
