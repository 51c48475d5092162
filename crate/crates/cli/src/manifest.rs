use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{ConfigDoc, ParamsDoc, RunDoc};
use crate::error::{CliError, ConfigError};

pub const FILE_NAME: &str = "manifest.json";

/// Settings of a subcommand beyond the configuration document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    /// Profile nodes for `wave`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// `verify` also runs the simulation-based checks.
    pub full: bool,
    /// Sweep axes, `key=v1,v2,...`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<String>,
    /// Subcommand run at each sweep point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    pub plot: bool,
}

/// Everything needed to reproduce an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub subcommand: String,
    pub params: ParamsDoc,
    pub config: RunDoc,
    pub options: Options,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, doc: &ConfigDoc, options: &Options, outputs: Vec<String>) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            subcommand: subcommand.to_string(),
            params: doc.params,
            config: doc.run,
            options: options.clone(),
            outputs,
        }
    }

    pub fn doc(&self) -> ConfigDoc {
        ConfigDoc {
            params: self.params,
            run: self.config,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let err = |message: String| ConfigError::Manifest {
            path: path.to_path_buf(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| err(e.to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(FILE_NAME);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(CliError::io(&path))?;
        Ok(path)
    }
}
