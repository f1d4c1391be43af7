//! Configuration-driven runner for the `ekman` library: checks, ε-studies,
//! solver runs and plots, each leaving a manifest next to its results.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod svg;

pub use commands::{Outcome, RunManifest};
pub use config::RunConfig;
pub use error::CliError;
