use std::path::PathBuf;

use clap::Args;
use rydberg_ghz_core::control::{optimize_dcrab, FomEvaluator, RampKind};
use rydberg_ghz_core::hamiltonian::{HamiltonianTerms, Pulse, DEFAULT_V_MHZ, EDGE_ISOLATION_MHZ};
use rydberg_ghz_core::protocols::{
    bell_distribution_protocol, forward_state, reverse_guess, reverse_sweep_fom, BellConfig,
    REVERSE_DURATION_US, REVERSE_END_MHZ,
};
use serde::{Deserialize, Serialize};

use super::common;
use super::optimize::{optimize_at, OptimizeConfig};
use crate::config::DcrabSettings;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json, PulseFile, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BellDistributeConfig {
    pub n_sites: usize,
    /// Forward (GHZ preparation) pulse file; optimized when absent.
    pub forward: Option<PathBuf>,
    pub forward_duration_us: f64,
    /// Reverse sweep pulse file; optimized from the default guess when absent.
    pub reverse: Option<PathBuf>,
    pub reverse_duration_us: f64,
    pub reverse_end_mhz: f64,
    /// Leave out the reverse sweep entirely.
    pub skip_reverse: bool,
    pub edge_shift_mhz: f64,
    pub keep_preparation_shifts: bool,
    pub phase_points: usize,
    pub v_mhz: f64,
    pub dt_us: f64,
    pub dcrab: DcrabSettings,
}

impl Default for BellDistributeConfig {
    fn default() -> Self {
        let b = BellConfig::default();
        BellDistributeConfig {
            n_sites: 8,
            forward: None,
            forward_duration_us: 1.1,
            reverse: None,
            reverse_duration_us: REVERSE_DURATION_US,
            reverse_end_mhz: REVERSE_END_MHZ,
            skip_reverse: false,
            edge_shift_mhz: EDGE_ISOLATION_MHZ,
            keep_preparation_shifts: b.keep_preparation_shifts,
            phase_points: b.phase_points,
            v_mhz: DEFAULT_V_MHZ,
            dt_us: b.options_dt_us,
            dcrab: DcrabSettings::default(),
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct BellDistributeArgs {
    #[arg(long)]
    pub n_sites: Option<usize>,
    #[arg(long)]
    pub forward: Option<PathBuf>,
    #[arg(long)]
    pub reverse: Option<PathBuf>,
    #[arg(long)]
    pub skip_reverse: bool,
    #[arg(long)]
    pub super_iterations: Option<usize>,
}

impl BellDistributeArgs {
    pub fn apply(&self, c: &mut BellDistributeConfig) {
        if let Some(n) = self.n_sites {
            c.n_sites = n;
        }
        if let Some(p) = &self.forward {
            c.forward = Some(p.clone());
        }
        if let Some(p) = &self.reverse {
            c.reverse = Some(p.clone());
        }
        if self.skip_reverse {
            c.skip_reverse = true;
        }
        if let Some(s) = self.super_iterations {
            c.dcrab.super_iterations = s;
        }
    }
}

impl BellDistributeConfig {
    fn bell(&self) -> BellConfig {
        BellConfig {
            edge_shift_mhz: self.edge_shift_mhz,
            keep_preparation_shifts: self.keep_preparation_shifts,
            phase_points: self.phase_points,
            options_dt_us: self.dt_us,
        }
    }

    fn validate(&self) -> CliResult<()> {
        common::check_even(self.n_sites, "n_sites")?;
        if self.n_sites < 4 {
            return Err(CliError::field(
                "n_sites",
                "entanglement distribution needs at least 4 sites",
            ));
        }
        common::check_positive(self.forward_duration_us, "forward_duration_us")?;
        common::check_positive(self.reverse_duration_us, "reverse_duration_us")?;
        common::check_positive(self.dt_us, "dt_us")?;
        if !self.edge_shift_mhz.is_finite() || !self.reverse_end_mhz.is_finite() {
            return Err(CliError::field("edge_shift_mhz", "must be finite"));
        }
        if self.phase_points < 3 {
            return Err(CliError::field(
                "phase_points",
                "need at least three phases",
            ));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Report {
    n_sites: usize,
    forward_fidelity: f64,
    reverse_psi_plus: Option<f64>,
    psi_plus_fidelity: f64,
    bulk_ground_probability: f64,
    edge_purity: f64,
    edge_patterns: [f64; 4],
    target_patterns: f64,
    phi_plus_fidelity: f64,
    parity_contrast: f64,
    parity_phase: f64,
    fidelity_bound: f64,
}

pub fn run(ctx: &mut Context, cfg: &BellDistributeConfig) -> CliResult<String> {
    cfg.validate()?;
    let n = cfg.n_sites;
    let basis = common::blockaded(n)?;
    let terms = HamiltonianTerms::new(&basis, cfg.v_mhz);
    let opts = common::options(cfg.dt_us)?;
    let bell = cfg.bell();

    let forward: Pulse = match &cfg.forward {
        Some(path) => common::load_pulse(ctx, path, n)?.0,
        None => {
            let oc = OptimizeConfig {
                n_sites: n,
                duration_us: cfg.forward_duration_us,
                v_mhz: cfg.v_mhz,
                guess: RampKind::Linear,
                edge_shifts: true,
                dt_us: cfg.dt_us,
                dcrab: cfg.dcrab.clone(),
                ..OptimizeConfig::default()
            };
            oc.validate()?;
            optimize_at(&oc, &basis, oc.duration_us, common::sub_seed(ctx.seed, 1))?
                .outcome
                .pulse
        }
    };
    let start = forward_state(&basis, &terms, &forward, &opts)?;
    let forward_fidelity = start.overlap(&rydberg_ghz_core::state::StateVector::ghz(&basis, 0.0)?);
    ctx.write(
        "forward_pulse.json",
        &PulseFile::new(forward.clone(), Some(n)).to_text(),
    )?;

    let (reverse, reverse_psi_plus) = if cfg.skip_reverse {
        (None, None)
    } else {
        let mut fom = reverse_sweep_fom(&basis, &terms, &start, &bell, opts)?;
        let pulse = match &cfg.reverse {
            Some(path) => common::load_pulse(ctx, path, n)?.0,
            None => {
                let guess = reverse_guess(cfg.reverse_duration_us, cfg.reverse_end_mhz);
                optimize_dcrab(
                    &guess,
                    &mut fom,
                    &cfg.dcrab.config(common::sub_seed(ctx.seed, 2))?,
                )?
                .pulse
            }
        };
        let f = fom.evaluate(&pulse)?;
        ctx.write(
            "reverse_pulse.json",
            &PulseFile::new(pulse.clone(), Some(n)).to_text(),
        )?;
        (Some(pulse), Some(f))
    };

    let r = bell_distribution_protocol(&basis, &terms, &forward, reverse.as_ref(), &bell)?;

    let mut parity = Table::new(["phase_rad", "edge_parity"])
        .meta("command", "bell-distribute")
        .meta("n_sites", n);
    for (&phi, &p) in r.phases.iter().zip(&r.edge_parity) {
        parity.push(vec![phi.into(), p.into()]);
    }
    ctx.write("edge_parity.csv", &parity.to_text())?;

    let mut sites = Table::new(["site", "rydberg_population"])
        .meta("command", "bell-distribute")
        .meta(
            "stage",
            if cfg.skip_reverse {
                "forward"
            } else {
                "reverse"
            },
        );
    for (i, &p) in r.site_populations.iter().enumerate() {
        sites.push(vec![(i + 1).into(), p.into()]);
    }
    ctx.write("sites.csv", &sites.to_text())?;

    let bulk_ground_probability = r.site_populations[1..n - 1]
        .iter()
        .map(|x| 1.0 - x)
        .product();
    let report = Report {
        n_sites: n,
        forward_fidelity,
        reverse_psi_plus,
        psi_plus_fidelity: r.psi_plus_fidelity,
        bulk_ground_probability,
        edge_purity: r.edge_purity,
        edge_patterns: r.edge_patterns,
        target_patterns: r.target_patterns,
        phi_plus_fidelity: r.phi_plus_fidelity,
        parity_contrast: r.parity_fit.amplitude,
        parity_phase: r.parity_fit.phase,
        fidelity_bound: r.fidelity_bound,
    };
    ctx.write("report.json", &to_json(&report))?;
    Ok(format!(
        "bell distribution N={n}: GHZ {:.4}, Psi+ {:.4}, edge purity {:.4}, patterns {:.4}, contrast {:.4}, bound {:.4}",
        forward_fidelity, r.psi_plus_fidelity, r.edge_purity, r.target_patterns, r.parity_fit.amplitude, r.fidelity_bound
    ))
}
