//! Command-line front end for `compaction-core`: JSON configuration,
//! CSV outputs, run manifests and parameter sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

pub use commands::{execute, Invocation, Outcome, Source, Subcommand};
pub use config::{parse_config, ConfigDoc, Resolved};
pub use error::{CliError, ConfigError};
pub use manifest::{Options, RunManifest};
