//! IO, configuration and command-line plumbing around `spinstar-core`.

pub mod config;
pub mod crosscheck;
pub mod error;
pub mod output;
pub mod sweep;
pub mod trajectories;

pub use error::{CliError, CliResult};
