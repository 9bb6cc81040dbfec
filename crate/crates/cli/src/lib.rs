//! Command-line front end for the Rydberg-chain GHZ simulator: configs,
//! file formats, run manifests and the subcommands.

#![allow(clippy::manual_is_multiple_of)]

pub mod commands;
pub mod config;
pub mod context;
pub mod error;
pub mod formats;
pub mod io;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::{
    bell_distribute, decay_scan, evolve, infer, optimize, parity_scan, ramp_compare, trace_eigenpop,
};
use config::load_config;
use context::Context;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "rydberg-ghz",
    version,
    about = "GHZ state preparation and readout on Rydberg atom chains"
)]
pub struct Cli {
    /// Master seed; generated and recorded in the manifest when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// TOML config, or the manifest.json of an earlier run to replay it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimize a preparation pulse with dCRAB.
    Optimize(optimize::OptimizeArgs),
    /// Evolve a pulse (or take the ideal GHZ state) and report populations.
    Evolve(evolve::EvolveArgs),
    /// Parity oscillation scan and coherence bound.
    ParityScan(parity_scan::ParityScanArgs),
    /// Detection-error inference from a shots file.
    Infer(infer::InferArgs),
    /// Linear, local-adiabatic and optimal ramps versus preparation time.
    RampCompare(ramp_compare::RampCompareArgs),
    /// Distribute a Bell pair to the chain edges.
    BellDistribute(bell_distribute::BellDistributeArgs),
    /// GHZ coherence decay under static disorder.
    DecayScan(decay_scan::DecayScanArgs),
    /// Populations of the instantaneous eigenstates along a pulse.
    TraceEigenpop(trace_eigenpop::TraceEigenpopArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Optimize(_) => "optimize",
            Command::Evolve(_) => "evolve",
            Command::ParityScan(_) => "parity-scan",
            Command::Infer(_) => "infer",
            Command::RampCompare(_) => "ramp-compare",
            Command::BellDistribute(_) => "bell-distribute",
            Command::DecayScan(_) => "decay-scan",
            Command::TraceEigenpop(_) => "trace-eigenpop",
        }
    }
}

fn execute<C, F>(cli: &Cli, apply: impl FnOnce(&mut C), run: F) -> CliResult<String>
where
    C: DeserializeOwned + Default + Serialize,
    F: FnOnce(&mut Context, &C) -> CliResult<String>,
{
    let command = cli.command.name();
    let loaded = load_config::<C>(cli.config.as_deref(), command)?;
    let mut cfg = loaded.config;
    apply(&mut cfg);
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| CliError::io(&cli.out_dir, e))?;
    let mut ctx = Context::new(cli.out_dir.clone(), cli.seed.or(loaded.manifest_seed));
    let summary = run(&mut ctx, &cfg)?;
    ctx.finish(command, &cfg)?;
    Ok(summary)
}

/// Runs a parsed command line and returns the one-line summary.
pub fn run(cli: &Cli) -> CliResult<String> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::field("threads", "must be at least 1"));
        }
        // A pool may already exist when several runs share a process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match &cli.command {
        Command::Optimize(a) => execute(cli, |c| a.apply(c), optimize::run),
        Command::Evolve(a) => execute(cli, |c| a.apply(c), evolve::run),
        Command::ParityScan(a) => execute(cli, |c| a.apply(c), parity_scan::run),
        Command::Infer(a) => execute(cli, |c| a.apply(c), infer::run),
        Command::RampCompare(a) => execute(cli, |c| a.apply(c), ramp_compare::run),
        Command::BellDistribute(a) => execute(cli, |c| a.apply(c), bell_distribute::run),
        Command::DecayScan(a) => execute(cli, |c| a.apply(c), decay_scan::run),
        Command::TraceEigenpop(a) => execute(cli, |c| a.apply(c), trace_eigenpop::run),
    }
}
