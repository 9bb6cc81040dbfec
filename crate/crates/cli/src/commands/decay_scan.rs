use clap::Args;
use rayon::prelude::*;
use rydberg_ghz_core::hamiltonian::DEFAULT_V_MHZ;
use rydberg_ghz_core::noise::{
    aggregate, decohered_ghz_coherence, doppler_coherence_oracle, doppler_coherence_time,
    noisy_realization, CoherenceDecay, NoiseModel,
};
use rydberg_ghz_core::protocols::exact_ghz_decomposition;
use serde::{Deserialize, Serialize};

use super::common::{self, Source};
use crate::config::NoiseConfig;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayScanConfig {
    pub n_sites: Vec<usize>,
    /// `ideal-ghz` or a pulse file (a single chain length only).
    pub source: String,
    /// Hold times, µs. When empty, `delay_points` times up to
    /// `max_delay_factor` Doppler coherence times of each chain.
    pub delays_us: Vec<f64>,
    pub delay_points: usize,
    pub max_delay_factor: f64,
    pub noise: NoiseConfig,
    pub v_mhz: f64,
    pub edge_shifts: bool,
    pub dt_us: f64,
}

impl Default for DecayScanConfig {
    fn default() -> Self {
        let m = NoiseModel::doppler_only(NoiseModel::default().doppler_sigma_mhz);
        DecayScanConfig {
            n_sites: vec![8, 12, 20],
            source: common::IDEAL_GHZ.to_string(),
            delays_us: Vec::new(),
            delay_points: 41,
            max_delay_factor: 2.5,
            noise: NoiseConfig {
                doppler_sigma_mhz: m.doppler_sigma_mhz,
                position_sigma: m.position_sigma,
                scattering_time_us: m.scattering_time_us,
                rydberg_lifetime_us: m.rydberg_lifetime_us,
                n_realizations: m.n_realizations,
            },
            v_mhz: DEFAULT_V_MHZ,
            edge_shifts: true,
            dt_us: rydberg_ghz_core::propagator::DEFAULT_DT_US,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct DecayScanArgs {
    /// Comma-separated chain lengths.
    #[arg(long, value_delimiter = ',')]
    pub n_sites: Option<Vec<usize>>,
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub n_realizations: Option<usize>,
    #[arg(long)]
    pub doppler_sigma_mhz: Option<f64>,
}

impl DecayScanArgs {
    pub fn apply(&self, c: &mut DecayScanConfig) {
        if let Some(n) = &self.n_sites {
            c.n_sites = n.clone();
        }
        if let Some(s) = &self.source {
            c.source = s.clone();
        }
        if let Some(r) = self.n_realizations {
            c.noise.n_realizations = r;
        }
        if let Some(s) = self.doppler_sigma_mhz {
            c.noise.doppler_sigma_mhz = s;
        }
    }
}

impl DecayScanConfig {
    fn validate(&self) -> CliResult<()> {
        if self.n_sites.is_empty() {
            return Err(CliError::field("n_sites", "need at least one chain length"));
        }
        for &n in &self.n_sites {
            common::check_even(n, "n_sites")?;
        }
        if matches!(Source::parse(&self.source), Source::Pulse(_)) && self.n_sites.len() != 1 {
            return Err(CliError::field(
                "source",
                "a pulse file fixes the chain length; give one n_sites",
            ));
        }
        if self.delays_us.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(CliError::field(
                "delays_us",
                "must be finite and non-negative",
            ));
        }
        if self.delays_us.is_empty() {
            if self.delay_points < 3 {
                return Err(CliError::field(
                    "delay_points",
                    "need at least three delays",
                ));
            }
            common::check_positive(self.max_delay_factor, "max_delay_factor")?;
            common::check_positive(self.noise.doppler_sigma_mhz, "noise.doppler_sigma_mhz")
                .map_err(|_| {
                    CliError::field(
                        "delays_us",
                        "automatic delays need a positive Doppler spread",
                    )
                })?;
        }
        Ok(())
    }

    fn delays(&self, n: usize) -> Vec<f64> {
        if !self.delays_us.is_empty() {
            return self.delays_us.clone();
        }
        let t = doppler_coherence_time(self.noise.doppler_sigma_mhz, n) * self.max_delay_factor;
        let m = self.delay_points - 1;
        (0..=m).map(|j| t * j as f64 / m as f64).collect()
    }
}

#[derive(Serialize)]
struct ChainReport {
    n_sites: usize,
    beta0_abs: f64,
    gaussian_timescale_us: f64,
    exponential_timescale_us: f64,
    gaussian_beats_exponential: bool,
    doppler_timescale_us: f64,
}

#[derive(Serialize)]
struct NoisyReport {
    mean_fidelity: f64,
    std_fidelity: f64,
    stderr_fidelity: f64,
    n_realizations: usize,
}

#[derive(Serialize)]
struct Report {
    source: String,
    chains: Vec<ChainReport>,
    noisy_preparation: Option<NoisyReport>,
}

pub fn run(ctx: &mut Context, cfg: &DecayScanConfig) -> CliResult<String> {
    cfg.validate()?;
    let model = cfg.noise.model(common::sub_seed(ctx.seed, 1))?;
    let opts = common::options(cfg.dt_us)?;

    // Pulse sources load before the parallel part so the input is recorded.
    let mut states = Vec::new();
    let mut pulse = None;
    for &n in &cfg.n_sites {
        let basis = common::blockaded(n)?;
        let s = common::source_state(ctx, &cfg.source, &basis, cfg.v_mhz, cfg.edge_shifts, &opts)?;
        pulse = s.pulse;
        states.push((basis, s.state));
    }

    let decays = states
        .par_iter()
        .map(|(basis, state)| -> CliResult<(f64, CoherenceDecay)> {
            let n = basis.n_sites();
            let beta0 = exact_ghz_decomposition(basis, &state.amplitudes)?
                .beta()
                .norm();
            Ok((
                beta0,
                decohered_ghz_coherence(
                    basis,
                    &state.amplitudes,
                    cfg.v_mhz,
                    &model,
                    &cfg.delays(n),
                )?,
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let sigma = model.doppler_sigma_mhz;
    let mut curve = Table::new([
        "n_sites",
        "delay_us",
        "mean_abs_beta",
        "stderr",
        "survival",
        "doppler_oracle",
    ])
    .meta("command", "decay-scan")
    .meta("doppler_sigma_mhz", sigma)
    .meta("n_realizations", model.n_realizations);
    let mut fits = Table::new([
        "n_sites",
        "gaussian_amplitude",
        "gaussian_timescale_us",
        "gaussian_rms",
        "exponential_amplitude",
        "exponential_timescale_us",
        "exponential_rms",
        "doppler_timescale_us",
    ])
    .meta("command", "decay-scan");
    let mut chains = Vec::new();
    for ((basis, _), (beta0, d)) in states.iter().zip(&decays) {
        let n = basis.n_sites();
        for j in 0..d.times_us.len() {
            let t = d.times_us[j];
            let oracle = beta0 * doppler_coherence_oracle(sigma, n, t) * d.survival[j];
            curve.push(vec![
                n.into(),
                t.into(),
                d.mean_abs_beta[j].into(),
                d.stderr[j].into(),
                d.survival[j].into(),
                oracle.into(),
            ]);
        }
        let t_oracle = if sigma > 0.0 {
            doppler_coherence_time(sigma, n)
        } else {
            f64::INFINITY
        };
        fits.push(vec![
            n.into(),
            d.gaussian.amplitude.into(),
            d.gaussian.timescale_us.into(),
            d.gaussian.rms_residual.into(),
            d.exponential.amplitude.into(),
            d.exponential.timescale_us.into(),
            d.exponential.rms_residual.into(),
            t_oracle.into(),
        ]);
        chains.push(ChainReport {
            n_sites: n,
            beta0_abs: *beta0,
            gaussian_timescale_us: d.gaussian.timescale_us,
            exponential_timescale_us: d.exponential.timescale_us,
            gaussian_beats_exponential: d.gaussian.rms_residual < d.exponential.rms_residual,
            doppler_timescale_us: t_oracle,
        });
    }
    ctx.write("decay.csv", &curve.to_text())?;
    ctx.write("fits.csv", &fits.to_text())?;

    let noisy_preparation = match &pulse {
        Some(p) => {
            let basis = &states[0].0;
            let shifts = common::shifts(basis.n_sites(), cfg.edge_shifts);
            let samples = (0..model.n_realizations as u64)
                .into_par_iter()
                .map(|k| noisy_realization(basis, cfg.v_mhz, &shifts, p, &model, k, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let agg = aggregate(samples);
            let mut t = Table::new(["realization", "fidelity", "survival", "ghz_fidelity"])
                .meta("command", "decay-scan")
                .meta("n_sites", basis.n_sites());
            for (k, s) in agg.samples.iter().enumerate() {
                t.push(vec![
                    k.into(),
                    s.fidelity.into(),
                    s.survival.into(),
                    s.decomposition.fidelity.into(),
                ]);
            }
            ctx.write("noisy.csv", &t.to_text())?;
            Some(NoisyReport {
                mean_fidelity: agg.mean_fidelity,
                std_fidelity: agg.std_fidelity,
                stderr_fidelity: agg.stderr_fidelity,
                n_realizations: agg.samples.len(),
            })
        }
        None => None,
    };

    let summary = chains
        .iter()
        .map(|c| format!("N={} T={:.3} us", c.n_sites, c.gaussian_timescale_us))
        .collect::<Vec<_>>()
        .join(", ");
    let noisy = noisy_preparation
        .as_ref()
        .map(|r| {
            format!(
                "; noisy preparation {:.4} +- {:.4}",
                r.mean_fidelity, r.stderr_fidelity
            )
        })
        .unwrap_or_default();
    ctx.write(
        "report.json",
        &to_json(&Report {
            source: cfg.source.clone(),
            chains,
            noisy_preparation,
        }),
    )?;
    Ok(format!("coherence decay: {summary}{noisy}"))
}
