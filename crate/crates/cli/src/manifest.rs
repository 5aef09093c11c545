use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario_path: String,
    /// SHA-256 of the scenario file bytes, hex.
    pub scenario_sha256: String,
    pub seed: u64,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    pub wall_clock_s: f64,
    pub software_version: String,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Serialize(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Serialize(e.to_string()))
    }

    /// Checks that every listed output exists and carries the scenario
    /// hash in its header.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        let tag = format!("# scenario_sha256={}", self.scenario_sha256);
        for name in &self.outputs {
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            if !text.lines().take_while(|l| l.starts_with('#')).any(|l| l == tag) {
                return Err(CliError::Manifest(format!("{name}: header lacks the scenario hash")));
            }
        }
        Ok(())
    }
}
