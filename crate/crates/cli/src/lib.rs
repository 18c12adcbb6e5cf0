//! Configuration, execution and output of `hanle` runs.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Mode, RawConfig, RunConfig};
pub use error::CliError;
