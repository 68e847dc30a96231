use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::files::{FileDigest, OutDir};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Record of one command execution, sufficient to re-run it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub inputs: Vec<FileDigest>,
    /// Data files, relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("--manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("--manifest {}: {e}", path.display())))
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// What a command hands back for its manifest.
pub struct Run {
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
}

pub fn finish(command: &str, started_at: String, run: Run, out: &mut OutDir) -> CliResult<RunManifest> {
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        command: command.to_string(),
        config: run.config,
        seed: run.seed,
        version: nlplap::VERSION.to_string(),
        started_at,
        finished_at: now(),
        inputs: run.inputs,
        outputs: out.written().to_vec(),
    };
    out.write_json(MANIFEST_FILE, &manifest)?;
    Ok(manifest)
}
