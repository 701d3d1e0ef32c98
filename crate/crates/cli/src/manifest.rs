//! Run manifests: one per output directory, recording what produced it.

use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    /// Subcommand that produced this directory.
    pub command: String,
    /// Full argument vector for replay.
    pub argv: Vec<String>,
    /// Scenario or grid config path, when one was given.
    pub config_path: Option<PathBuf>,
    /// Input data path, when one was given.
    pub data_path: Option<PathBuf>,
    /// Effective scenario seed, when applicable.
    pub seed: Option<u64>,
    pub timestamp: String,
    /// Files written into the output directory.
    pub artifacts: Vec<String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config_path: None,
            data_path: None,
            seed: None,
            timestamp: chrono::Utc::now().to_rfc3339(),
            artifacts: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn record_artifact(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.artifacts.push(name.to_string_lossy().into_owned());
        }
    }

    /// Writes `manifest.json` into the output directory.
    pub fn write(&self, out_dir: &Path) -> std::io::Result<()> {
        let path = out_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json)
    }
}
