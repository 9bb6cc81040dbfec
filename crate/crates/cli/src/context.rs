use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliResult;
use crate::formats::{RunManifest, Timing, MANIFEST_VERSION};
use crate::io::{sha256_hex, write_atomic};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Per-run state: output directory, master seed and the files touched.
pub struct Context {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub seed_generated: bool,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    started: SystemTime,
    clock: Instant,
}

impl Context {
    pub fn new(out_dir: PathBuf, seed: Option<u64>) -> Self {
        let (seed, seed_generated) = match seed {
            Some(s) => (s, false),
            None => (rand::random::<u64>(), true),
        };
        Context {
            out_dir,
            seed,
            seed_generated,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn record_input(&mut self, path: &Path, digest: &str) {
        self.inputs
            .insert(path.display().to_string(), digest.to_string());
    }

    /// Writes `name` under the output directory and records its digest.
    pub fn write(&mut self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.out_dir.join(name);
        write_atomic(&path, text.as_bytes())?;
        self.outputs
            .insert(name.to_string(), sha256_hex(text.as_bytes()));
        Ok(path)
    }

    pub fn outputs(&self) -> &BTreeMap<String, String> {
        &self.outputs
    }

    /// Writes the manifest last, so it lists every other output.
    pub fn finish<C: Serialize>(self, command: &str, config: &C) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            manifest_version: MANIFEST_VERSION,
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            seed_generated: self.seed_generated,
            config: serde_json::to_value(config).expect("serializable config"),
            inputs: self.inputs,
            outputs: self.outputs,
            timing: Timing {
                started_unix_s: self
                    .started
                    .duration_since(UNIX_EPOCH)
                    .map_or(0.0, |d| d.as_secs_f64()),
                elapsed_s: self.clock.elapsed().as_secs_f64(),
            },
        };
        write_atomic(
            &self.out_dir.join(MANIFEST_FILE),
            manifest.to_text().as_bytes(),
        )?;
        Ok(manifest)
    }
}
