use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::config_hash;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Reproducibility record written next to the outputs of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub command: String,
    /// SHA-256 of the canonical form of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub generator_id: String,
    pub config: Value,
    pub started: String,
    pub finished: String,
    /// File names relative to the run directory.
    pub outputs: Vec<String>,
    pub version: String,
}

impl ExperimentManifest {
    pub fn hash_matches(&self) -> bool {
        config_hash(&self.config) == self.config_hash
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::validation("", format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::validation("", format!("{} is not a run manifest: {e}", path.display())))
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
