//! Batch front-end for the `geophase` library: TOML-configured experiments
//! written out as CSV tables.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod experiments;
pub mod runner;
pub mod table;

pub use config::{RunConfig, Sweep};
pub use error::CliError;
pub use experiments::{find, registry, Experiment};
pub use runner::{execute, Overrides, RunOutcome};
pub use table::{Cell, Table};
