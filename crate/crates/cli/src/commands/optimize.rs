use clap::Args;
use rydberg_ghz_core::control::{
    local_adiabatic_pulse, optimize_dcrab, FigureOfMerit, RampKind, RampSpec, SimulatedFom,
};
use rydberg_ghz_core::hamiltonian::{DriveModel, HamiltonianTerms, Pulse, DEFAULT_V_MHZ};
use rydberg_ghz_core::protocols::exact_ghz_decomposition;
use rydberg_ghz_core::state::StateVector;
use serde::{Deserialize, Serialize};

use super::common::{self, GhzReport};
use crate::config::DcrabSettings;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json, PulseFile, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub n_sites: usize,
    pub duration_us: f64,
    pub v_mhz: f64,
    pub omega_max_mhz: f64,
    /// Detuning sweep of the guess, also the detuning bounds.
    pub delta_start_mhz: f64,
    pub delta_end_mhz: f64,
    /// Guess pulse: `linear` or `local_adiabatic`.
    pub guess: RampKind,
    pub edge_shifts: bool,
    pub fom: FigureOfMerit,
    pub dt_us: f64,
    pub dcrab: DcrabSettings,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        let spec = RampSpec::new(RampKind::Linear, 1.1);
        OptimizeConfig {
            n_sites: 4,
            duration_us: spec.total_time_us,
            v_mhz: DEFAULT_V_MHZ,
            omega_max_mhz: spec.omega_max_mhz,
            delta_start_mhz: spec.delta0_mhz,
            delta_end_mhz: spec.delta1_mhz,
            guess: RampKind::Linear,
            edge_shifts: true,
            fom: FigureOfMerit::GhzFidelity { phase: 0.0 },
            dt_us: rydberg_ghz_core::propagator::DEFAULT_DT_US,
            dcrab: DcrabSettings::default(),
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n_sites: Option<usize>,
    /// Preparation time T, µs.
    #[arg(long)]
    pub duration_us: Option<f64>,
    #[arg(long)]
    pub super_iterations: Option<usize>,
    #[arg(long)]
    pub max_evaluations: Option<usize>,
}

impl OptimizeArgs {
    pub fn apply(&self, c: &mut OptimizeConfig) {
        if let Some(n) = self.n_sites {
            c.n_sites = n;
        }
        if let Some(t) = self.duration_us {
            c.duration_us = t;
        }
        if let Some(s) = self.super_iterations {
            c.dcrab.super_iterations = s;
        }
        if let Some(m) = self.max_evaluations {
            c.dcrab.max_total_evaluations = m;
        }
    }
}

impl OptimizeConfig {
    pub fn ramp(&self, kind: RampKind, duration_us: f64) -> RampSpec {
        RampSpec {
            kind,
            delta0_mhz: self.delta_start_mhz,
            delta1_mhz: self.delta_end_mhz,
            omega_max_mhz: self.omega_max_mhz,
            total_time_us: duration_us,
            ..RampSpec::new(kind, duration_us)
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        common::check_chain(self.n_sites, "n_sites")?;
        common::check_positive(self.duration_us, "duration_us")?;
        common::check_positive(self.dt_us, "dt_us")?;
        if let FigureOfMerit::GhzFidelity { .. } = self.fom {
            common::check_even(self.n_sites, "n_sites")?;
        }
        if self.guess == RampKind::OptimalControl {
            return Err(CliError::field(
                "guess",
                "must be `linear` or `local_adiabatic`",
            ));
        }
        self.ramp(self.guess, self.duration_us)
            .validate()
            .map_err(|e| CliError::field("delta_start_mhz", e))?;
        Ok(())
    }
}

/// Evaluator, guess pulse and optimized outcome for one preparation time.
pub struct Optimized {
    pub guess: Pulse,
    pub outcome: rydberg_ghz_core::control::DcrabOutcome,
    pub evaluator: SimulatedFom,
}

/// Builds the figure of merit, in the even sector when the target allows it.
pub fn evaluator(
    cfg: &OptimizeConfig,
    basis: &rydberg_ghz_core::basis::Basis,
) -> CliResult<SimulatedFom> {
    let opts = common::options(cfg.dt_us)?;
    let target = cfg.fom.target(basis)?;
    let symmetric = matches!(cfg.fom, FigureOfMerit::GhzFidelity { phase } if phase == 0.0);
    let model = if symmetric {
        common::preparation_model(basis, cfg.v_mhz, cfg.edge_shifts)?
    } else {
        let terms = HamiltonianTerms::new(basis, cfg.v_mhz);
        DriveModel::new(
            basis,
            &terms,
            &common::shifts(basis.n_sites(), cfg.edge_shifts),
        )?
    };
    Ok(SimulatedFom::new(
        model,
        &StateVector::ground(basis),
        &target,
        opts,
    )?)
}

pub fn guess_pulse(
    cfg: &OptimizeConfig,
    kind: RampKind,
    duration_us: f64,
    fom: &SimulatedFom,
) -> CliResult<Pulse> {
    let spec = cfg.ramp(kind, duration_us);
    match kind {
        RampKind::LocalAdiabatic => Ok(local_adiabatic_pulse(&spec, fom.model())?.0),
        _ => Ok(spec.linear_pulse()),
    }
}

pub fn optimize_at(
    cfg: &OptimizeConfig,
    basis: &rydberg_ghz_core::basis::Basis,
    duration_us: f64,
    seed: u64,
) -> CliResult<Optimized> {
    let mut evaluator = evaluator(cfg, basis)?;
    let guess = guess_pulse(cfg, cfg.guess, duration_us, &evaluator)?;
    let outcome = optimize_dcrab(&guess, &mut evaluator, &cfg.dcrab.config(seed)?)?;
    Ok(Optimized {
        guess,
        outcome,
        evaluator,
    })
}

#[derive(Serialize)]
struct Report {
    n_sites: usize,
    duration_us: f64,
    fidelity: f64,
    initial_fidelity: f64,
    evaluations: usize,
    super_iteration_best: Vec<f64>,
    ghz: Option<GhzReport>,
}

pub fn run(ctx: &mut Context, cfg: &OptimizeConfig) -> CliResult<String> {
    cfg.validate()?;
    let basis = common::blockaded(cfg.n_sites)?;
    let opt = optimize_at(cfg, &basis, cfg.duration_us, ctx.seed)?;
    let out = &opt.outcome;

    let pulse_text = PulseFile::new(out.pulse.clone(), Some(cfg.n_sites)).to_text();
    ctx.write("pulse.json", &pulse_text)?;

    let mut trace = Table::new(["evaluation", "super_iteration", "fom", "best"])
        .meta("command", "optimize")
        .meta("n_sites", cfg.n_sites)
        .meta("duration_us", cfg.duration_us);
    for e in &out.trace {
        trace.push(vec![
            e.evaluation.into(),
            e.super_iteration.into(),
            e.fom.into(),
            e.best.into(),
        ]);
    }
    ctx.write("trace.csv", &trace.to_text())?;

    let final_state = opt
        .evaluator
        .model()
        .to_parent(&opt.evaluator.final_state(&out.pulse)?)?;
    let ghz = if cfg.n_sites % 2 == 0 {
        Some(GhzReport::from(&exact_ghz_decomposition(
            &basis,
            &final_state,
        )?))
    } else {
        None
    };
    let report = Report {
        n_sites: cfg.n_sites,
        duration_us: cfg.duration_us,
        fidelity: out.fom,
        initial_fidelity: out.initial_fom,
        evaluations: out.evaluations,
        super_iteration_best: out.super_iteration_best.clone(),
        ghz,
    };
    ctx.write("report.json", &to_json(&report))?;
    Ok(format!(
        "optimized N={} T={} us: fidelity {:.6} (guess {:.6}) after {} evaluations",
        cfg.n_sites, cfg.duration_us, out.fom, out.initial_fom, out.evaluations
    ))
}
