use clap::Args;
use rayon::prelude::*;
use rydberg_ghz_core::control::{FigureOfMerit, FomEvaluator, RampKind};
use rydberg_ghz_core::hamiltonian::DEFAULT_V_MHZ;
use serde::{Deserialize, Serialize};

use super::common;
use super::optimize::{evaluator, guess_pulse, optimize_at, OptimizeConfig};
use crate::config::DcrabSettings;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampCompareConfig {
    pub n_sites: usize,
    pub durations_us: Vec<f64>,
    pub v_mhz: f64,
    pub omega_max_mhz: f64,
    pub delta_start_mhz: f64,
    pub delta_end_mhz: f64,
    pub edge_shifts: bool,
    pub dt_us: f64,
    /// Optimal control starts from the linear ramp at each duration.
    pub dcrab: DcrabSettings,
}

impl Default for RampCompareConfig {
    fn default() -> Self {
        let o = OptimizeConfig::default();
        RampCompareConfig {
            n_sites: 12,
            durations_us: vec![0.6, 0.8, 1.1, 1.5, 2.0],
            v_mhz: DEFAULT_V_MHZ,
            omega_max_mhz: o.omega_max_mhz,
            delta_start_mhz: o.delta_start_mhz,
            delta_end_mhz: o.delta_end_mhz,
            edge_shifts: true,
            dt_us: o.dt_us,
            dcrab: o.dcrab,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct RampCompareArgs {
    #[arg(long)]
    pub n_sites: Option<usize>,
    /// Comma-separated preparation times, µs.
    #[arg(long, value_delimiter = ',')]
    pub durations_us: Option<Vec<f64>>,
    #[arg(long)]
    pub super_iterations: Option<usize>,
}

impl RampCompareArgs {
    pub fn apply(&self, c: &mut RampCompareConfig) {
        if let Some(n) = self.n_sites {
            c.n_sites = n;
        }
        if let Some(d) = &self.durations_us {
            c.durations_us = d.clone();
        }
        if let Some(s) = self.super_iterations {
            c.dcrab.super_iterations = s;
        }
    }
}

impl RampCompareConfig {
    fn optimize_config(&self, duration_us: f64) -> OptimizeConfig {
        OptimizeConfig {
            n_sites: self.n_sites,
            duration_us,
            v_mhz: self.v_mhz,
            omega_max_mhz: self.omega_max_mhz,
            delta_start_mhz: self.delta_start_mhz,
            delta_end_mhz: self.delta_end_mhz,
            guess: RampKind::Linear,
            edge_shifts: self.edge_shifts,
            fom: FigureOfMerit::GhzFidelity { phase: 0.0 },
            dt_us: self.dt_us,
            dcrab: self.dcrab.clone(),
        }
    }
}

#[derive(Serialize)]
struct Row {
    duration_us: f64,
    linear: f64,
    local_adiabatic: f64,
    optimal: f64,
    evaluations: usize,
}

#[derive(Serialize)]
struct Report {
    n_sites: usize,
    rows: Vec<Row>,
}

pub fn run(ctx: &mut Context, cfg: &RampCompareConfig) -> CliResult<String> {
    common::check_even(cfg.n_sites, "n_sites")?;
    if cfg.durations_us.is_empty() {
        return Err(CliError::field(
            "durations_us",
            "need at least one duration",
        ));
    }
    for (j, &t) in cfg.durations_us.iter().enumerate() {
        common::check_positive(t, &format!("durations_us[{j}]"))?;
        cfg.optimize_config(t).validate()?;
    }
    let basis = common::blockaded(cfg.n_sites)?;
    let seed = ctx.seed;
    let rows = cfg
        .durations_us
        .par_iter()
        .enumerate()
        .map(|(j, &t)| -> CliResult<Row> {
            let oc = cfg.optimize_config(t);
            let mut fom = evaluator(&oc, &basis)?;
            let linear = fom.evaluate(&guess_pulse(&oc, RampKind::Linear, t, &fom)?)?;
            let local_adiabatic =
                fom.evaluate(&guess_pulse(&oc, RampKind::LocalAdiabatic, t, &fom)?)?;
            let opt = optimize_at(&oc, &basis, t, common::sub_seed(seed, j as u64))?;
            Ok(Row {
                duration_us: t,
                linear,
                local_adiabatic,
                optimal: opt.outcome.fom,
                evaluations: opt.outcome.evaluations,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut table = Table::new([
        "duration_us",
        "linear",
        "local_adiabatic",
        "optimal",
        "evaluations",
    ])
    .meta("command", "ramp-compare")
    .meta("n_sites", cfg.n_sites);
    for r in &rows {
        table.push(vec![
            r.duration_us.into(),
            r.linear.into(),
            r.local_adiabatic.into(),
            r.optimal.into(),
            r.evaluations.into(),
        ]);
    }
    ctx.write("ramp_compare.csv", &table.to_text())?;
    let summary = rows
        .iter()
        .map(|r| {
            format!(
                "T={}: lin {:.4} la {:.4} opt {:.4}",
                r.duration_us, r.linear, r.local_adiabatic, r.optimal
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    ctx.write(
        "report.json",
        &to_json(&Report {
            n_sites: cfg.n_sites,
            rows,
        }),
    )?;
    Ok(format!("ramp comparison N={}: {summary}", cfg.n_sites))
}
