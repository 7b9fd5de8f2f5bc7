use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tarsim::{CostStructure, Strategy};

use crate::error::{Classify, CliResult};

/// Index of a grid run, written as `manifest.json` in the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub recall_target: f64,
    pub batch_size: usize,
    pub extension_batches: usize,
    pub structures: Vec<CostStructure>,
    pub runs: Vec<RunEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub category: String,
    pub strategy: Strategy,
    pub seed: u64,
    /// Trace path relative to the manifest's directory.
    pub trace: Option<String>,
    pub status: RunStatus,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Error,
}

impl Manifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).data_ctx(format!("reading {}", path.display()))?;
        serde_json::from_str(&text).data_ctx(format!("parsing {}", path.display()))
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunEntry> {
        self.runs.iter().filter(|r| r.status == RunStatus::Error)
    }
}

impl RunEntry {
    pub fn trace_path(&self, manifest_dir: &Path) -> Option<PathBuf> {
        self.trace.as_ref().map(|t| manifest_dir.join(t))
    }
}

/// Maps a category name onto a single safe path component.
pub fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    match s.as_str() {
        "" | "." | ".." => format!("_{s}"),
        _ => s,
    }
}
