//! Config-driven experiment runner for the `fracwave` library.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fieldio;
pub mod manifest;
pub mod plot;
pub mod setup;

pub use error::{CliError, Result};

/// Overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "FRACWAVE_OUTPUT_DIR";
/// Worker threads for the parallel stages.
pub const THREADS_ENV: &str = "FRACWAVE_THREADS";
