//! Configuration-driven front end: every run writes CSV files and a
//! reproducibility manifest into its run directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod runner;

pub use commands::{Command, CommandRegistry};
pub use error::{CliError, CliResult};
pub use manifest::ExperimentManifest;
pub use runner::{execute, main_with, Args};
