use std::path::PathBuf;

use clap::Args;
use rydberg_ghz_core::control::{eigenpopulation_trace, local_adiabatic_pulse, RampKind};
use rydberg_ghz_core::hamiltonian::DEFAULT_V_MHZ;
use rydberg_ghz_core::state::StateVector;
use rydberg_ghz_core::units::to_mhz;
use serde::{Deserialize, Serialize};

use super::common;
use super::optimize::OptimizeConfig;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceEigenpopConfig {
    pub n_sites: usize,
    /// Pulse file; when absent the `ramp` guess of length `duration_us`.
    pub pulse: Option<PathBuf>,
    pub ramp: RampKind,
    pub duration_us: f64,
    /// Instantaneous eigenstates tracked, lowest first.
    pub levels: usize,
    pub samples: usize,
    pub v_mhz: f64,
    pub edge_shifts: bool,
    pub dt_us: f64,
}

impl Default for TraceEigenpopConfig {
    fn default() -> Self {
        TraceEigenpopConfig {
            n_sites: 8,
            pulse: None,
            ramp: RampKind::Linear,
            duration_us: 1.1,
            levels: 6,
            samples: 110,
            v_mhz: DEFAULT_V_MHZ,
            edge_shifts: true,
            dt_us: rydberg_ghz_core::propagator::DEFAULT_DT_US,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct TraceEigenpopArgs {
    #[arg(long)]
    pub n_sites: Option<usize>,
    #[arg(long)]
    pub pulse: Option<PathBuf>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
}

impl TraceEigenpopArgs {
    pub fn apply(&self, c: &mut TraceEigenpopConfig) {
        if let Some(n) = self.n_sites {
            c.n_sites = n;
        }
        if let Some(p) = &self.pulse {
            c.pulse = Some(p.clone());
        }
        if let Some(m) = self.levels {
            c.levels = m;
        }
        if let Some(s) = self.samples {
            c.samples = s;
        }
    }
}

#[derive(Serialize)]
struct Report {
    n_sites: usize,
    sector_dim: usize,
    duration_us: f64,
    /// Smallest E_1 − E_0 along the pulse, MHz.
    min_gap_mhz: f64,
    min_gap_time_us: f64,
    final_ground_population: f64,
}

pub fn run(ctx: &mut Context, cfg: &TraceEigenpopConfig) -> CliResult<String> {
    common::check_chain(cfg.n_sites, "n_sites")?;
    if cfg.levels == 0 {
        return Err(CliError::field("levels", "must be at least 1"));
    }
    if cfg.samples == 0 {
        return Err(CliError::field("samples", "must be at least 1"));
    }
    let n = cfg.n_sites;
    let basis = common::blockaded(n)?;
    let opts = common::options(cfg.dt_us)?;
    // Eigenstates of the even reflection sector, the one |0…0⟩ lives in.
    let model = common::preparation_model(&basis, cfg.v_mhz, cfg.edge_shifts)?;
    let pulse = match &cfg.pulse {
        Some(path) => common::load_pulse(ctx, path, n)?.0,
        None => {
            if cfg.ramp == RampKind::OptimalControl {
                return Err(CliError::field(
                    "ramp",
                    "must be `linear` or `local_adiabatic` without a pulse file",
                ));
            }
            let spec = OptimizeConfig::default().ramp(cfg.ramp, cfg.duration_us);
            match cfg.ramp {
                RampKind::LocalAdiabatic => local_adiabatic_pulse(&spec, &model)?.0,
                _ => spec.linear_pulse(),
            }
        }
    };
    let psi0 = model.from_parent(&StateVector::ground(&basis).amplitudes)?;
    let slices = eigenpopulation_trace(&model, &pulse, &psi0, cfg.levels, cfg.samples, &opts)?;

    let m = cfg.levels.min(model.dim());
    let mut columns = vec![
        "time_us".to_string(),
        "omega_mhz".to_string(),
        "delta_mhz".to_string(),
    ];
    columns.extend((0..m).map(|k| format!("energy_{k}_mhz")));
    columns.extend((0..m).map(|k| format!("population_{k}")));
    let mut table = Table::new(columns)
        .meta("command", "trace-eigenpop")
        .meta("n_sites", n)
        .meta("sector", "even");
    let mut min_gap = (f64::INFINITY, 0.0);
    for s in &slices {
        let t = s.parameter;
        let (om, de) = pulse.controls_mhz(t)?;
        let mut row = vec![t.into(), om.into(), de.into()];
        row.extend(s.energies.iter().map(|&e| to_mhz(e).into()));
        let pops = s.overlaps.clone().unwrap_or_default();
        row.extend(pops.iter().map(|&p| p.into()));
        table.push(row);
        if s.energies.len() > 1 {
            let gap = to_mhz(s.energies[1] - s.energies[0]);
            if gap < min_gap.0 {
                min_gap = (gap, t);
            }
        }
    }
    ctx.write("eigenpop.csv", &table.to_text())?;
    let final_ground = slices
        .last()
        .and_then(|s| s.overlaps.as_ref())
        .and_then(|o| o.first().copied())
        .unwrap_or(f64::NAN);
    let report = Report {
        n_sites: n,
        sector_dim: model.dim(),
        duration_us: pulse.duration_us,
        min_gap_mhz: min_gap.0,
        min_gap_time_us: min_gap.1,
        final_ground_population: final_ground,
    };
    ctx.write("report.json", &to_json(&report))?;
    Ok(format!(
        "eigenpopulations N={n}: {} slices, minimum gap {:.4} MHz at t={:.4} us, final ground population {:.4}",
        slices.len(),
        min_gap.0,
        min_gap.1,
        final_ground
    ))
}
