//! Configuration loading and the settings blocks shared by several commands.
//!
//! A command's configuration comes from its defaults, then an optional TOML
//! file (or the `config` of a previous run's manifest), then command-line
//! flags.

use std::path::Path;

use rydberg_ghz_core::control::{CorrectedControls, DcrabConfig, NelderMeadOptions};
use rydberg_ghz_core::detection::DetectionModel;
use rydberg_ghz_core::noise::NoiseModel;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::formats::RunManifest;
use crate::io::read_text;

/// A loaded configuration and, when it came from a manifest, that run's seed.
pub struct Loaded<T> {
    pub config: T,
    pub manifest_seed: Option<u64>,
}

pub fn load_config<T: DeserializeOwned + Default>(
    path: Option<&Path>,
    command: &str,
) -> CliResult<Loaded<T>> {
    let Some(path) = path else {
        return Ok(Loaded {
            config: T::default(),
            manifest_seed: None,
        });
    };
    let text = read_text(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        let m = RunManifest::parse(&text, path)?;
        if m.command != command {
            return Err(CliError::validation(format!(
                "{}: manifest is for `{}`, not `{command}`",
                path.display(),
                m.command
            )));
        }
        let config = serde_json::from_value(m.config).map_err(|e| CliError::field("config", e))?;
        return Ok(Loaded {
            config,
            manifest_seed: Some(m.seed),
        });
    }
    let config = toml::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        config,
        manifest_seed: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    pub p10: f64,
    pub p01: f64,
    pub sigma_p10: f64,
    pub sigma_p01: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        let m = DetectionModel::default();
        DetectionConfig {
            p10: m.p10,
            p01: m.p01,
            sigma_p10: m.sigma_p10,
            sigma_p01: m.sigma_p01,
        }
    }
}

impl DetectionConfig {
    pub fn model(&self) -> CliResult<DetectionModel> {
        let m = DetectionModel {
            p10: self.p10,
            p01: self.p01,
            sigma_p10: self.sigma_p10,
            sigma_p01: self.sigma_p01,
        };
        m.validate().map_err(|e| CliError::field("detection", e))?;
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcrabSettings {
    pub super_iterations: usize,
    /// Nelder-Mead evaluations per super-iteration.
    pub step_evaluations: usize,
    pub max_total_evaluations: usize,
    pub max_frequency_index: u32,
    pub omega_scale_mhz: f64,
    pub delta_scale_mhz: f64,
    pub controls: CorrectedControls,
}

impl Default for DcrabSettings {
    fn default() -> Self {
        let d = DcrabConfig::default();
        DcrabSettings {
            super_iterations: d.super_iterations,
            step_evaluations: d.nelder_mead.max_evaluations,
            max_total_evaluations: d.max_total_evaluations,
            max_frequency_index: d.max_frequency_index,
            omega_scale_mhz: d.omega_scale_mhz,
            delta_scale_mhz: d.delta_scale_mhz,
            controls: d.controls,
        }
    }
}

impl DcrabSettings {
    pub fn config(&self, seed: u64) -> CliResult<DcrabConfig> {
        let c = DcrabConfig {
            super_iterations: self.super_iterations,
            nelder_mead: NelderMeadOptions {
                max_evaluations: self.step_evaluations,
                ..NelderMeadOptions::default()
            },
            omega_scale_mhz: self.omega_scale_mhz,
            delta_scale_mhz: self.delta_scale_mhz,
            max_frequency_index: self.max_frequency_index,
            max_total_evaluations: self.max_total_evaluations,
            controls: self.controls,
            seed,
        };
        c.validate().map_err(|e| CliError::field("dcrab", e))?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub doppler_sigma_mhz: f64,
    pub position_sigma: f64,
    /// µs; `inf` (or null in a manifest) turns the channel off.
    #[serde(deserialize_with = "finite_or_off")]
    pub scattering_time_us: Option<f64>,
    #[serde(deserialize_with = "finite_or_off")]
    pub rydberg_lifetime_us: Option<f64>,
    pub n_realizations: usize,
}

fn finite_or_off<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.filter(|t| *t != f64::INFINITY))
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let m = NoiseModel::default();
        NoiseConfig {
            doppler_sigma_mhz: m.doppler_sigma_mhz,
            position_sigma: m.position_sigma,
            scattering_time_us: m.scattering_time_us,
            rydberg_lifetime_us: m.rydberg_lifetime_us,
            n_realizations: m.n_realizations,
        }
    }
}

impl NoiseConfig {
    pub fn model(&self, seed: u64) -> CliResult<NoiseModel> {
        let m = NoiseModel {
            doppler_sigma_mhz: self.doppler_sigma_mhz,
            position_sigma: self.position_sigma,
            scattering_time_us: self.scattering_time_us,
            rydberg_lifetime_us: self.rydberg_lifetime_us,
            n_realizations: self.n_realizations,
            seed,
        };
        m.validate().map_err(|e| CliError::field("noise", e))?;
        Ok(m)
    }
}
