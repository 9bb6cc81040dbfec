use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use rydberg_ghz_core::detection::{
    bootstrap_draw, summarize, BootstrapResult, DetectionModel, GroupedDistribution, Grouping,
    InferenceOptions,
};
use serde::{Deserialize, Serialize};

use crate::config::DetectionConfig;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json, ShotsFile, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferConfig {
    pub shots: PathBuf,
    pub grouping: Grouping,
    pub detection: DetectionConfig,
    /// Bootstrap resamples; 0 skips the bootstrap.
    pub n_resamples: usize,
}

impl Default for InferConfig {
    fn default() -> Self {
        InferConfig {
            shots: PathBuf::new(),
            grouping: Grouping::MagnetizationExcitation,
            detection: DetectionConfig::default(),
            n_resamples: 200,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct InferArgs {
    /// Shots file to analyse.
    #[arg(long)]
    pub shots: Option<PathBuf>,
    #[arg(long)]
    pub n_resamples: Option<usize>,
    /// Read-out error P(1|0).
    #[arg(long)]
    pub p10: Option<f64>,
    /// Read-out error P(0|1).
    #[arg(long)]
    pub p01: Option<f64>,
}

impl InferArgs {
    pub fn apply(&self, c: &mut InferConfig) {
        if let Some(s) = &self.shots {
            c.shots = s.clone();
        }
        if let Some(r) = self.n_resamples {
            c.n_resamples = r;
        }
        if let Some(p) = self.p10 {
            c.detection.p10 = p;
        }
        if let Some(p) = self.p01 {
            c.detection.p01 = p;
        }
    }
}

/// Inference plus a bootstrap whose replicates run on the thread pool and
/// are reduced in replicate order.
pub fn infer_measured(
    measured: Vec<f64>,
    n_shots: u64,
    n_sites: usize,
    grouping: Grouping,
    model: &DetectionModel,
    n_resamples: usize,
    seed: u64,
) -> CliResult<(GroupedDistribution, Option<BootstrapResult>)> {
    let opts = InferenceOptions::default();
    let grouped = GroupedDistribution::from_measured(measured, n_sites, grouping, model, &opts)?;
    if n_resamples == 0 {
        return Ok((grouped, None));
    }
    let samples = (0..n_resamples as u64)
        .into_par_iter()
        .map(|r| {
            bootstrap_draw(
                &grouped.measured,
                n_shots,
                grouping,
                n_sites,
                model,
                seed,
                r,
                &opts,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((grouped, Some(summarize(samples))))
}

#[derive(Serialize)]
pub struct TargetPopulation {
    pub raw: f64,
    pub inferred: f64,
    pub sigma: Option<f64>,
}

/// Population of the two GHZ groups, when the grouping resolves them.
pub fn target_population(
    g: &GroupedDistribution,
    boot: Option<&BootstrapResult>,
) -> Option<TargetPopulation> {
    let (a, b) = g.grouping.ghz_groups(g.n_sites)?;
    let sigma = boot
        .and_then(|r| r.sigma.as_ref())
        .map(|s| (s[a] * s[a] + s[b] * s[b]).sqrt());
    Some(TargetPopulation {
        raw: g.measured[a] + g.measured[b],
        inferred: g.inferred[a] + g.inferred[b],
        sigma,
    })
}

#[derive(Serialize)]
struct Diagnostics {
    residual_norm: f64,
    kkt_residual: f64,
    iterations: usize,
    active_set: Vec<usize>,
}

#[derive(Serialize)]
struct Report {
    n_sites: usize,
    n_shots: usize,
    grouping: Grouping,
    target_population: Option<TargetPopulation>,
    n_resamples: usize,
    diagnostics: Diagnostics,
}

pub fn distribution_table(g: &GroupedDistribution, boot: Option<&BootstrapResult>) -> Table {
    let mut t = Table::new([
        "group",
        "excitations",
        "magnetization",
        "measured",
        "inferred",
        "sigma",
    ])
    .meta("n_sites", g.n_sites)
    .meta(
        "grouping",
        serde_json::to_value(g.grouping)
            .expect("enum")
            .as_str()
            .unwrap_or_default(),
    );
    for (j, label) in g.labels.iter().enumerate() {
        let sigma = boot
            .and_then(|r| r.sigma.as_ref())
            .map_or(f64::NAN, |s| s[j]);
        t.push(vec![
            j.into(),
            label.excitations.into(),
            label.magnetization.map_or("".into(), |m| m.into()),
            g.measured[j].into(),
            g.inferred[j].into(),
            sigma.into(),
        ]);
    }
    t
}

pub fn run(ctx: &mut Context, cfg: &InferConfig) -> CliResult<String> {
    if cfg.shots.as_os_str().is_empty() {
        return Err(CliError::field("shots", "a shots file is required"));
    }
    let (file, digest) = ShotsFile::load(&cfg.shots)?;
    ctx.record_input(&cfg.shots, &digest);
    if file.shots.is_empty() {
        return Err(CliError::validation(format!(
            "{}: file contains no shots",
            cfg.shots.display()
        )));
    }
    let model = cfg.detection.model()?;
    let set = file.to_set()?;
    let counts = cfg.grouping.counts(&set);
    let total = set.len() as f64;
    let measured = counts.iter().map(|&c| c as f64 / total).collect();
    let (grouped, boot) = infer_measured(
        measured,
        set.len() as u64,
        set.n_sites,
        cfg.grouping,
        &model,
        cfg.n_resamples,
        ctx.seed,
    )?;
    ctx.write(
        "inference.csv",
        &distribution_table(&grouped, boot.as_ref()).to_text(),
    )?;
    let target = target_population(&grouped, boot.as_ref());
    let summary = match &target {
        Some(t) => format!(
            "inferred target population {:.4} (raw {:.4}{}) from {} shots",
            t.inferred,
            t.raw,
            t.sigma.map_or(String::new(), |s| format!(", sigma {s:.4}")),
            set.len()
        ),
        None => format!(
            "inferred {} groups from {} shots",
            grouped.labels.len(),
            set.len()
        ),
    };
    let d = &grouped.diagnostics;
    let report = Report {
        n_sites: set.n_sites,
        n_shots: set.len(),
        grouping: cfg.grouping,
        target_population: target,
        n_resamples: cfg.n_resamples,
        diagnostics: Diagnostics {
            residual_norm: d.residual_norm,
            kkt_residual: d.kkt_residual,
            iterations: d.iterations,
            active_set: d.active_set.clone(),
        },
    };
    ctx.write("report.json", &to_json(&report))?;
    Ok(summary)
}
