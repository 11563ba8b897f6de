//! Command-line front end: training runs, analysis reports and explanations.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

pub use error::{CliError, Result};
