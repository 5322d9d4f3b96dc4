//! Run manifests: everything needed to reproduce a run bit-identically.
//!
//! The manifest JSON itself is deterministic; wall-clock timings go to a
//! separate plain-text file (listed in the manifest) so re-runs produce
//! byte-identical CSV/JSON outputs.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, RepSeeds};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub rep_seeds: Vec<RepSeeds>,
    /// Command-specific flags and diagnostics (precondition violations,
    /// oracle summaries, …).
    pub notes: serde_json::Value,
    /// Every file the run emitted, relative to the output directory.
    pub files: Vec<String>,
    /// Non-deterministic diagnostics live here, not in this manifest.
    pub timing_file: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig, notes: serde_json::Value) -> Self {
        let rep_seeds = (0..config.repetitions as u64)
            .map(|r| config.rep_seeds(r))
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            rep_seeds,
            notes,
            files: Vec::new(),
            timing_file: "timing.txt".to_string(),
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Write phase timings; deliberately outside the deterministic outputs.
pub fn write_timing(out_dir: &Path, phases: &[(String, std::time::Duration)]) -> Result<()> {
    let mut text = String::new();
    for (name, dur) in phases {
        text.push_str(&format!("{name}: {:.3}s\n", dur.as_secs_f64()));
    }
    std::fs::write(out_dir.join("timing.txt"), text)?;
    Ok(())
}
