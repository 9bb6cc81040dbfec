use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::read_text;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_s: f64,
    pub elapsed_s: f64,
}

/// Everything needed to repeat a run: command, resolved configuration,
/// master seed, code version and digests of every file read or written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub command: String,
    pub code_version: String,
    pub seed: u64,
    /// True when no seed was given and one was drawn for this run.
    pub seed_generated: bool,
    pub config: serde_json::Value,
    /// Path → sha256 of every input file.
    pub inputs: BTreeMap<String, String>,
    /// File name (relative to the output directory) → sha256.
    pub outputs: BTreeMap<String, String>,
    pub timing: Timing,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        super::to_json(self)
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let m: RunManifest = serde_json::from_str(text)
            .map_err(|e| CliError::parse(path, e.line(), e.to_string()))?;
        if m.manifest_version != MANIFEST_VERSION {
            return Err(CliError::parse(
                path,
                1,
                format!("unsupported manifest version {}", m.manifest_version),
            ));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_text(path)?, path)
    }
}
