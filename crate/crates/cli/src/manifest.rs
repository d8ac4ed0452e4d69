//! Run manifest written next to every command's outputs.

use serde::Serialize;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

/// CSV schema versions, bumped whenever columns change. Columns are never
/// silently reordered.
pub const SCHEMA_VERSIONS: &[(&str, u32)] = &[
    ("analysis", 1),
    ("ccdf", 1),
    ("sensitivity", 1),
    ("history", 1),
    ("comparison", 1),
    ("validation", 1),
    ("delays", 1),
];

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub subcommand: String,
    pub config: String,
    pub out_dir: String,
    pub seed: Option<u64>,
    pub overrides: Vec<String>,
    pub schema_versions: Vec<(String, u32)>,
    pub unix_time: u64,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        config: &Path,
        out_dir: &Path,
        seed: Option<u64>,
        overrides: &[String],
    ) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config: config.display().to_string(),
            out_dir: out_dir.display().to_string(),
            seed,
            overrides: overrides.to_vec(),
            schema_versions: SCHEMA_VERSIONS
                .iter()
                .map(|&(name, version)| (name.to_string(), version))
                .collect(),
            unix_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn write(&self, out_dir: &Path) -> anyhow::Result<()> {
        let path = out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
