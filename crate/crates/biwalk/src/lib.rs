//! File formats, parallel execution and subcommands for the `biwalk` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;
pub mod validate;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use exec::RayonExecutor;
