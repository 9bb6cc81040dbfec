//! Shot files: `#` header lines followed by one bitstring per line, site 1
//! leftmost.
//!
//! ```text
//! # rydberg-ghz shots v1
//! # n_sites = 4
//! # seed = 7
//! # duration_us = 1.1
//! # pulse_id = ideal-ghz
//! 0101
//! 1010
//! ```

use std::fmt::Write;
use std::path::Path;

use rydberg_ghz_core::basis::{ChainGeometry, MAX_SITES};
use rydberg_ghz_core::detection::ShotSet;

use crate::error::{CliError, CliResult};
use crate::io::read_text;

const MAGIC: &str = "# rydberg-ghz shots v1";

#[derive(Clone, Debug, PartialEq)]
pub struct ShotsFile {
    pub n_sites: usize,
    pub seed: Option<u64>,
    pub duration_us: Option<f64>,
    pub pulse_id: Option<String>,
    pub shots: Vec<u64>,
}

impl ShotsFile {
    pub fn from_set(set: &ShotSet, duration_us: Option<f64>, pulse_id: Option<String>) -> Self {
        ShotsFile {
            n_sites: set.n_sites,
            seed: set.seed,
            duration_us,
            pulse_id,
            shots: set.shots.clone(),
        }
    }

    pub fn to_set(&self) -> CliResult<ShotSet> {
        let mut set = ShotSet::new(self.n_sites, self.shots.clone())?;
        set.seed = self.seed;
        Ok(set)
    }

    pub fn to_text(&self) -> String {
        let g = ChainGeometry::full(self.n_sites);
        let mut s = String::with_capacity(self.shots.len() * (self.n_sites + 1) + 128);
        s.push_str(MAGIC);
        s.push('\n');
        let _ = writeln!(s, "# n_sites = {}", self.n_sites);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed = {seed}");
        }
        if let Some(t) = self.duration_us {
            let _ = writeln!(s, "# duration_us = {t}");
        }
        if let Some(id) = &self.pulse_id {
            let _ = writeln!(s, "# pulse_id = {id}");
        }
        for &c in &self.shots {
            s.push_str(&g.format_pattern(c));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let mut n_sites = None;
        let mut seed = None;
        let mut duration_us = None;
        let mut pulse_id = None;
        let mut shots = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if !shots.is_empty() {
                    return Err(CliError::parse(
                        path,
                        line_no,
                        "header line after the first shot",
                    ));
                }
                let Some((key, value)) = rest.split_once('=') else {
                    continue;
                };
                let (key, value) = (key.trim(), value.trim());
                let bad = |what: &str| {
                    CliError::parse(path, line_no, format!("invalid {what} `{value}`"))
                };
                match key {
                    "n_sites" => {
                        let n: usize = value.parse().map_err(|_| bad("n_sites"))?;
                        if n == 0 || n > MAX_SITES {
                            return Err(bad("n_sites"));
                        }
                        n_sites = Some(n);
                    }
                    "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
                    "duration_us" => {
                        duration_us = Some(value.parse().map_err(|_| bad("duration_us"))?)
                    }
                    "pulse_id" => pulse_id = Some(value.to_string()),
                    _ => {}
                }
                continue;
            }
            let Some(n) = n_sites else {
                return Err(CliError::parse(
                    path,
                    line_no,
                    "shot before the `# n_sites = ...` header",
                ));
            };
            if line.len() != n || !line.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(CliError::parse(
                    path,
                    line_no,
                    format!("expected {n} characters of 0/1, found `{line}`"),
                ));
            }
            shots.push(
                line.bytes()
                    .fold(0u64, |acc, b| (acc << 1) | (b - b'0') as u64),
            );
        }
        let n_sites =
            n_sites.ok_or_else(|| CliError::parse(path, 1, "missing `# n_sites = ...` header"))?;
        Ok(ShotsFile {
            n_sites,
            seed,
            duration_us,
            pulse_id,
            shots,
        })
    }

    pub fn load(path: &Path) -> CliResult<(Self, String)> {
        let text = read_text(path)?;
        let file = Self::parse(&text, path)?;
        Ok((file, crate::io::sha256_hex(text.as_bytes())))
    }
}
