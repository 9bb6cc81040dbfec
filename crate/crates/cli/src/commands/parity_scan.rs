use clap::Args;
use rayon::prelude::*;
use rydberg_ghz_core::basis::Basis;
use rydberg_ghz_core::detection::{sample_shots, Grouping};
use rydberg_ghz_core::hamiltonian::{
    staggered_field_generator, DEFAULT_V_MHZ, STAGGERED_PROBE_MHZ,
};
use rydberg_ghz_core::protocols::{
    coherence_lower_bound, default_scan_times, exact_ghz_decomposition, fidelity_lower_bound,
    fit_fixed_frequency, fit_free_frequency, optimal_ux_duration, parity_oscillation_scan,
    ParityFit, Readout, ReadoutSpec,
};
use rydberg_ghz_core::units::Mhz;
use rydberg_ghz_core::Complex64;
use serde::{Deserialize, Serialize};

use super::common::{self, GhzReport};
use super::infer::{distribution_table, infer_measured, target_population, TargetPopulation};
use crate::config::DetectionConfig;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutKind {
    /// Resonant drive of the interacting chain.
    Interacting,
    /// Ideal π/2 rotation on every atom.
    Ideal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParityScanConfig {
    pub n_sites: usize,
    /// Pulse file, or `ideal-ghz`.
    pub source: String,
    pub v_mhz: f64,
    pub edge_shifts: bool,
    pub dt_us: f64,
    pub delta_p_mhz: f64,
    /// Scan points over one period 1/δ_p; 0 selects 8N.
    pub points: usize,
    pub readout: ReadoutKind,
    pub readout_omega_mhz: f64,
    /// U_x duration; optimized on a 1 ns grid when absent.
    pub readout_duration_us: Option<f64>,
    /// Shots per scan point (and for the population estimate); absent for
    /// exact expectation values only.
    pub n_shots: Option<usize>,
    pub detection: DetectionConfig,
    pub n_resamples: usize,
}

impl Default for ParityScanConfig {
    fn default() -> Self {
        ParityScanConfig {
            n_sites: 8,
            source: common::IDEAL_GHZ.to_string(),
            v_mhz: DEFAULT_V_MHZ,
            edge_shifts: true,
            dt_us: rydberg_ghz_core::propagator::DEFAULT_DT_US,
            delta_p_mhz: STAGGERED_PROBE_MHZ,
            points: 0,
            readout: ReadoutKind::Interacting,
            readout_omega_mhz: 5.0,
            readout_duration_us: None,
            n_shots: None,
            detection: DetectionConfig::default(),
            n_resamples: 100,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct ParityScanArgs {
    #[arg(long)]
    pub n_sites: Option<usize>,
    /// Pulse file or `ideal-ghz`.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub delta_p_mhz: Option<f64>,
    #[arg(long)]
    pub n_shots: Option<usize>,
    #[arg(long)]
    pub n_resamples: Option<usize>,
    #[arg(long, value_enum)]
    pub readout: Option<ReadoutKind>,
}

impl ParityScanArgs {
    pub fn apply(&self, c: &mut ParityScanConfig) {
        if let Some(n) = self.n_sites {
            c.n_sites = n;
        }
        if let Some(s) = &self.source {
            c.source = s.clone();
        }
        if let Some(d) = self.delta_p_mhz {
            c.delta_p_mhz = d;
        }
        if let Some(r) = self.readout {
            c.readout = r;
        }
        if self.n_shots.is_some() {
            c.n_shots = self.n_shots;
        }
        if let Some(r) = self.n_resamples {
            c.n_resamples = r;
        }
    }
}

#[derive(Serialize)]
struct FitReport {
    frequency_mhz: f64,
    contrast: f64,
    phase: f64,
    offset: f64,
    rms_residual: f64,
}

impl From<&ParityFit> for FitReport {
    fn from(f: &ParityFit) -> Self {
        FitReport {
            frequency_mhz: f.frequency_mhz,
            contrast: f.amplitude,
            phase: f.phase,
            offset: f.offset,
            rms_residual: f.rms_residual,
        }
    }
}

#[derive(Serialize)]
struct ShotReport {
    n_shots: usize,
    fit: FitReport,
    target_population: Option<TargetPopulation>,
    fidelity_bound: f64,
}

#[derive(Serialize)]
struct Report {
    n_sites: usize,
    source: String,
    delta_p_mhz: f64,
    readout: ReadoutKind,
    readout_duration_us: Option<f64>,
    /// Fit at N·δ_p; its contrast enters the bounds.
    fit: FitReport,
    /// Frequency left free within ±40 % of N·δ_p.
    free_fit: FitReport,
    coherence_bound: f64,
    fidelity_bound: f64,
    exact: GhzReport,
    shots: Option<ShotReport>,
}

fn readout_basis<'a>(readout: &'a Readout, basis: &'a Basis) -> &'a Basis {
    match readout {
        Readout::Ideal { full, .. } => full,
        Readout::Interacting { .. } => basis,
    }
}

pub fn run(ctx: &mut Context, cfg: &ParityScanConfig) -> CliResult<String> {
    common::check_even(cfg.n_sites, "n_sites")?;
    common::check_positive(cfg.delta_p_mhz, "delta_p_mhz")?;
    common::check_positive(cfg.readout_omega_mhz, "readout_omega_mhz")?;
    if cfg.n_shots == Some(0) {
        return Err(CliError::field(
            "n_shots",
            "shots mode needs at least one shot per point",
        ));
    }
    let n = cfg.n_sites;
    let basis = common::blockaded(n)?;
    let opts = common::options(cfg.dt_us)?;
    let src = common::source_state(ctx, &cfg.source, &basis, cfg.v_mhz, cfg.edge_shifts, &opts)?;
    let psi = &src.state.amplitudes;

    let (spec, duration) = match cfg.readout {
        ReadoutKind::Ideal => (ReadoutSpec::IdealPiHalf, None),
        ReadoutKind::Interacting => {
            let d = match cfg.readout_duration_us {
                Some(d) if d >= 0.0 => d,
                Some(d) => {
                    return Err(CliError::field(
                        "readout_duration_us",
                        format!("must be non-negative, got {d}"),
                    ))
                }
                None => optimal_ux_duration(&basis, cfg.readout_omega_mhz, cfg.v_mhz, 0.2, 1e-3)?.0,
            };
            (
                ReadoutSpec::Interacting {
                    omega_mhz: cfg.readout_omega_mhz,
                    duration_us: d,
                },
                Some(d),
            )
        }
    };
    let readout = Readout::new(&basis, spec, cfg.v_mhz, opts)?;
    let times = if cfg.points == 0 {
        default_scan_times(n, cfg.delta_p_mhz)
    } else {
        (0..cfg.points)
            .map(|j| j as f64 / (cfg.points as f64 * cfg.delta_p_mhz))
            .collect()
    };
    let scan = parity_oscillation_scan(&basis, psi, Mhz(cfg.delta_p_mhz), &readout, &times)?;
    let exact = exact_ghz_decomposition(&basis, psi)?;
    let fit = &scan.fit;
    let expect = n as f64 * cfg.delta_p_mhz;
    let free = fit_free_frequency(&times, &scan.values, 0.6 * expect, 1.4 * expect)?;
    let bound = coherence_lower_bound(&scan);
    let fidelity_bound = fidelity_lower_bound(exact.target_population(), fit.amplitude);

    let mut table = Table::new(if cfg.n_shots.is_some() {
        vec!["time_us", "parity", "parity_shots"]
    } else {
        vec!["time_us", "parity"]
    })
    .meta("command", "parity-scan")
    .meta("n_sites", n)
    .meta("source", &src.id)
    .meta("delta_p_mhz", cfg.delta_p_mhz);

    let shots = match cfg.n_shots {
        None => {
            for (t, v) in times.iter().zip(&scan.values) {
                table.push(vec![(*t).into(), (*v).into()]);
            }
            None
        }
        Some(k) => {
            let model = cfg.detection.model()?;
            let gen = staggered_field_generator(&basis, Mhz(cfg.delta_p_mhz));
            let out_basis = readout_basis(&readout, &basis);
            let measured: Vec<f64> = times
                .par_iter()
                .enumerate()
                .map(|(j, &t)| -> CliResult<f64> {
                    let phased: Vec<Complex64> = psi
                        .iter()
                        .zip(&gen)
                        .map(|(a, g)| a * Complex64::from_polar(1.0, -g * t))
                        .collect();
                    let out = readout.apply(&basis, &phased)?;
                    let set = sample_shots(
                        out_basis,
                        &out,
                        k,
                        &model,
                        common::sub_seed(ctx.seed, 100 + j as u64),
                    )?;
                    let odd = set.shots.iter().filter(|s| s.count_ones() % 2 == 1).count();
                    Ok(1.0 - 2.0 * odd as f64 / k as f64)
                })
                .collect::<CliResult<_>>()?;
            for ((t, v), m) in times.iter().zip(&scan.values).zip(&measured) {
                table.push(vec![(*t).into(), (*v).into(), (*m).into()]);
            }
            let shot_fit = fit_fixed_frequency(&times, &measured, n as f64 * cfg.delta_p_mhz)?;

            let pop_shots = sample_shots(&basis, psi, k, &model, common::sub_seed(ctx.seed, 2))?;
            let grouping = Grouping::MagnetizationExcitation;
            let counts = grouping.counts(&pop_shots);
            let w = counts.iter().map(|&c| c as f64 / k as f64).collect();
            let (grouped, boot) = infer_measured(
                w,
                k as u64,
                n,
                grouping,
                &model,
                cfg.n_resamples,
                common::sub_seed(ctx.seed, 3),
            )?;
            ctx.write(
                "population.csv",
                &distribution_table(&grouped, boot.as_ref()).to_text(),
            )?;
            let target = target_population(&grouped, boot.as_ref());
            let p = target.as_ref().map_or(0.0, |t| t.inferred);
            let fb = fidelity_lower_bound(p, shot_fit.amplitude);

            let mut row = Table::new([
                "n_sites",
                "raw_population",
                "inferred_population",
                "population_sigma",
                "contrast",
                "fidelity_bound",
            ])
            .meta("source", &src.id)
            .meta("n_shots", k);
            let t = target.as_ref().expect("even chain resolves the GHZ groups");
            row.push(vec![
                n.into(),
                t.raw.into(),
                t.inferred.into(),
                t.sigma.unwrap_or(f64::NAN).into(),
                shot_fit.amplitude.into(),
                fb.into(),
            ]);
            ctx.write("ghz_summary.csv", &row.to_text())?;
            Some(ShotReport {
                n_shots: k,
                fit: FitReport::from(&shot_fit),
                target_population: target,
                fidelity_bound: fb,
            })
        }
    };
    ctx.write("parity_scan.csv", &table.to_text())?;

    let summary = format!(
        "parity scan N={n}: frequency {:.4} MHz (N*delta_p = {:.4}), contrast {:.4}, fidelity bound {:.4}",
        free.frequency_mhz,
        expect,
        fit.amplitude,
        fidelity_bound
    );
    let report = Report {
        n_sites: n,
        source: src.id,
        delta_p_mhz: cfg.delta_p_mhz,
        readout: cfg.readout,
        readout_duration_us: duration,
        fit: FitReport::from(fit),
        free_fit: FitReport::from(&free),
        coherence_bound: bound.magnitude,
        fidelity_bound,
        exact: GhzReport::from(&exact),
        shots,
    };
    ctx.write("report.json", &to_json(&report))?;
    Ok(summary)
}
