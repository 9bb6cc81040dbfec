use clap::Args;
use rydberg_ghz_core::detection::{sample_shots, Grouping};
use rydberg_ghz_core::hamiltonian::DEFAULT_V_MHZ;
use rydberg_ghz_core::protocols::exact_ghz_decomposition;
use serde::{Deserialize, Serialize};

use super::common::{self, GhzReport};
use crate::config::DetectionConfig;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json, ShotsFile, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub n_sites: usize,
    /// Pulse file, or `ideal-ghz` for the exact GHZ state.
    pub source: String,
    pub v_mhz: f64,
    pub edge_shifts: bool,
    pub dt_us: f64,
    /// Detected shots to sample from the final state; 0 for none.
    pub n_shots: usize,
    pub detection: DetectionConfig,
    /// Basis states below this probability are left out of `state.csv`.
    pub min_probability: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            n_sites: 8,
            source: String::new(),
            v_mhz: DEFAULT_V_MHZ,
            edge_shifts: true,
            dt_us: rydberg_ghz_core::propagator::DEFAULT_DT_US,
            n_shots: 0,
            detection: DetectionConfig::default(),
            min_probability: 1e-6,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct EvolveArgs {
    #[arg(long)]
    pub n_sites: Option<usize>,
    /// Pulse file or `ideal-ghz`.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub n_shots: Option<usize>,
}

impl EvolveArgs {
    pub fn apply(&self, c: &mut EvolveConfig) {
        if let Some(n) = self.n_sites {
            c.n_sites = n;
        }
        if let Some(s) = &self.source {
            c.source = s.clone();
        }
        if let Some(k) = self.n_shots {
            c.n_shots = k;
        }
    }
}

#[derive(Serialize)]
struct Report {
    n_sites: usize,
    source: String,
    duration_us: Option<f64>,
    norm: f64,
    excitation_distribution: Vec<f64>,
    ghz: Option<GhzReport>,
    n_shots: usize,
}

pub fn run(ctx: &mut Context, cfg: &EvolveConfig) -> CliResult<String> {
    common::check_chain(cfg.n_sites, "n_sites")?;
    if cfg.source.is_empty() {
        return Err(CliError::field(
            "source",
            "a pulse file or `ideal-ghz` is required",
        ));
    }
    let basis = common::blockaded(cfg.n_sites)?;
    let opts = common::options(cfg.dt_us)?;
    let src = common::source_state(ctx, &cfg.source, &basis, cfg.v_mhz, cfg.edge_shifts, &opts)?;
    let psi = &src.state.amplitudes;
    let g = basis.geometry();

    let mut state = Table::new(["pattern", "probability", "re", "im"])
        .meta("command", "evolve")
        .meta("n_sites", cfg.n_sites)
        .meta("source", &src.id);
    for (c, a) in basis.configs().iter().zip(psi) {
        if a.norm_sqr() >= cfg.min_probability {
            state.push(vec![
                g.format_pattern(*c).into(),
                a.norm_sqr().into(),
                a.re.into(),
                a.im.into(),
            ]);
        }
    }
    ctx.write("state.csv", &state.to_text())?;

    let mut sites = Table::new(["site", "occupation"]).meta("n_sites", cfg.n_sites);
    for (i, n) in src.state.site_occupations(&basis).into_iter().enumerate() {
        sites.push(vec![(i + 1).into(), n.into()]);
    }
    ctx.write("sites.csv", &sites.to_text())?;

    let duration_us = src.pulse.as_ref().map(|p| p.duration_us);
    if cfg.n_shots > 0 {
        let model = cfg.detection.model()?;
        let set = sample_shots(
            &basis,
            psi,
            cfg.n_shots,
            &model,
            common::sub_seed(ctx.seed, 1),
        )?;
        let file = ShotsFile::from_set(&set, duration_us, Some(src.id.clone()));
        ctx.write("shots.txt", &file.to_text())?;
    }

    let ghz = if cfg.n_sites % 2 == 0 {
        Some(GhzReport::from(&exact_ghz_decomposition(&basis, psi)?))
    } else {
        None
    };
    let report = Report {
        n_sites: cfg.n_sites,
        source: src.id,
        duration_us,
        norm: src.state.norm(),
        excitation_distribution: Grouping::ExcitationCount.distribution(&basis, psi)?,
        ghz,
        n_shots: cfg.n_shots,
    };
    ctx.write("report.json", &to_json(&report))?;
    Ok(match &report.ghz {
        Some(d) => format!("evolved N={}: GHZ fidelity {:.6}", cfg.n_sites, d.fidelity),
        None => format!("evolved N={}", cfg.n_sites),
    })
}
