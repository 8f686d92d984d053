//! Command-line driver: configuration files, single runs, sweeps and the
//! assumption probe.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{cmd_probe, cmd_run, cmd_sweep, Provenance, RunSummary};
pub use config::{parse_config, resolve_config, SEED_ENV};
pub use error::{CliError, CliResult};
