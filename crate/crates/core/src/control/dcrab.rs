//! Dressed chopped-random-basis optimization.
//!
//! Each super-iteration dresses the incumbent pulse with one new Fourier
//! component per control, at frequency 2π(k + r)/τ with a fresh random
//! offset r, and tunes the four new coefficients with Nelder-Mead.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fom::FomEvaluator;
use super::nelder_mead::{minimize, NelderMeadOptions};
use crate::hamiltonian::{CrabTerm, Pulse};
use crate::{Error, Result};

/// Which controls receive corrections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectedControls {
    Omega,
    Delta,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcrabConfig {
    pub super_iterations: usize,
    /// Nelder-Mead budget (and coefficients) of one dressing step.
    pub nelder_mead: NelderMeadOptions,
    /// Initial simplex step for the Ω coefficients, MHz.
    pub omega_scale_mhz: f64,
    /// Initial simplex step for the Δ coefficients, MHz.
    pub delta_scale_mhz: f64,
    /// Frequency indices cycle through 1..=max_frequency_index.
    pub max_frequency_index: u32,
    /// Hard cap on FoM evaluations over the whole run.
    pub max_total_evaluations: usize,
    pub controls: CorrectedControls,
    pub seed: u64,
}

impl Default for DcrabConfig {
    fn default() -> Self {
        DcrabConfig {
            super_iterations: 8,
            nelder_mead: NelderMeadOptions::default(),
            omega_scale_mhz: 1.0,
            delta_scale_mhz: 4.0,
            max_frequency_index: 8,
            max_total_evaluations: 20_000,
            controls: CorrectedControls::Both,
            seed: 0,
        }
    }
}

impl DcrabConfig {
    pub fn validate(&self) -> Result<()> {
        self.nelder_mead.validate()?;
        if self.max_frequency_index == 0 || self.max_total_evaluations == 0 {
            return Err(Error::invalid("dcrab", "counts must be positive"));
        }
        if !(self.omega_scale_mhz > 0.0) || !(self.delta_scale_mhz > 0.0) {
            return Err(Error::invalid("dcrab", "simplex scales must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub evaluation: usize,
    pub super_iteration: usize,
    pub fom: f64,
    pub best: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DcrabOutcome {
    pub pulse: Pulse,
    pub fom: f64,
    pub initial_fom: f64,
    /// Best FoM after each super-iteration.
    pub super_iteration_best: Vec<f64>,
    pub trace: Vec<TraceEntry>,
    pub evaluations: usize,
}

/// Maximizes the figure of merit reported by `evaluator`, starting from
/// `initial`. The returned pulse is the best one ever evaluated.
pub fn optimize_dcrab(
    initial: &Pulse,
    evaluator: &mut dyn FomEvaluator,
    cfg: &DcrabConfig,
) -> Result<DcrabOutcome> {
    initial.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best_pulse = initial.clone();
    best_pulse.seed = Some(cfg.seed);
    let initial_fom = evaluator
        .evaluate(initial)
        .map_err(|e| Error::Optimization {
            iteration: 0,
            source: Box::new(e),
        })?;
    let mut best = initial_fom;
    let mut trace = alloc::vec![TraceEntry {
        evaluation: 1,
        super_iteration: 0,
        fom: initial_fom,
        best,
    }];
    let mut count = 1usize;
    let mut per_iteration = Vec::with_capacity(cfg.super_iterations);

    let (use_omega, use_delta) = match cfg.controls {
        CorrectedControls::Omega => (true, false),
        CorrectedControls::Delta => (false, true),
        CorrectedControls::Both => (true, true),
    };

    for it in 0..cfg.super_iterations {
        let remaining = cfg.max_total_evaluations.saturating_sub(count);
        if remaining == 0 {
            break;
        }
        let k = (it as u32 % cfg.max_frequency_index) + 1;
        let r_omega: f64 = rng.random_range(-0.5..=0.5);
        let r_delta: f64 = rng.random_range(-0.5..=0.5);
        let incumbent = best_pulse.clone();
        let make = |x: &[f64]| -> Pulse {
            let mut idx = 0;
            let om = if use_omega {
                idx += 2;
                Some(CrabTerm {
                    k,
                    r: r_omega,
                    a_mhz: x[0],
                    b_mhz: x[1],
                })
            } else {
                None
            };
            let de = if use_delta {
                Some(CrabTerm {
                    k,
                    r: r_delta,
                    a_mhz: x[idx],
                    b_mhz: x[idx + 1],
                })
            } else {
                None
            };
            incumbent.dressed(om, de)
        };
        let mut step = Vec::new();
        if use_omega {
            step.extend([cfg.omega_scale_mhz; 2]);
        }
        if use_delta {
            step.extend([cfg.delta_scale_mhz; 2]);
        }
        let x0 = alloc::vec![0.0; step.len()];
        let nm = NelderMeadOptions {
            max_evaluations: cfg.nelder_mead.max_evaluations.min(remaining),
            ..cfg.nelder_mead
        };
        let result = minimize(
            |x| {
                let p = make(x);
                let f = evaluator.evaluate(&p)?;
                count += 1;
                if f > best {
                    best = f;
                    best_pulse = p;
                }
                trace.push(TraceEntry {
                    evaluation: count,
                    super_iteration: it + 1,
                    fom: f,
                    best,
                });
                Ok(-f)
            },
            &x0,
            &step,
            &nm,
        );
        if let Err(e) = result {
            return Err(Error::Optimization {
                iteration: it + 1,
                source: Box::new(e),
            });
        }
        per_iteration.push(best);
    }

    Ok(DcrabOutcome {
        pulse: best_pulse,
        fom: best,
        initial_fom,
        super_iteration_best: per_iteration,
        trace,
        evaluations: count,
    })
}
