use std::path::Path;

use rydberg_ghz_core::hamiltonian::Pulse;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{read_text, sha256_hex};

pub const PULSE_FORMAT: &str = "rydberg-ghz-pulse";

/// A pulse with its envelope. All control values are in MHz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseFile {
    pub format: String,
    pub version: u32,
    /// Chain length the pulse was made for, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    pub pulse: Pulse,
}

impl PulseFile {
    pub fn new(pulse: Pulse, n_sites: Option<usize>) -> Self {
        PulseFile {
            format: PULSE_FORMAT.into(),
            version: 1,
            n_sites,
            pulse,
        }
    }

    pub fn to_text(&self) -> String {
        super::to_json(self)
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let file: PulseFile = serde_json::from_str(text)
            .map_err(|e| CliError::parse(path, e.line(), e.to_string()))?;
        if file.format != PULSE_FORMAT || file.version != 1 {
            return Err(CliError::parse(
                path,
                1,
                format!("not a version 1 {PULSE_FORMAT} file"),
            ));
        }
        file.pulse.validate()?;
        Ok(file)
    }

    /// Reads a pulse file and returns it with the digest of its bytes.
    pub fn load(path: &Path) -> CliResult<(Self, String)> {
        let text = read_text(path)?;
        let file = Self::parse(&text, path)?;
        Ok((file, sha256_hex(text.as_bytes())))
    }
}
