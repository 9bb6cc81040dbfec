//! Figures of merit and the callback boundary between optimizer and simulator.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::hamiltonian::{DriveModel, Pulse};
use crate::linalg::inner;
use crate::propagator::{evolve, EvolveOptions};
use crate::state::StateVector;
use crate::{Error, Result};

/// What a candidate pulse is scored against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FigureOfMerit {
    /// |⟨GHZ_φ|ψ(τ)⟩|² with GHZ_φ = (|A_N⟩ + e^{iφ}|Ā_N⟩)/√2.
    GhzFidelity {
        #[serde(default)]
        phase: f64,
    },
    /// |⟨target|ψ(τ)⟩|² for a single configuration.
    StateOverlap { pattern: alloc::string::String },
    /// Overlap with (|10…0⟩ + |0…01⟩)/√2: the edge Bell pair with the bulk
    /// returned to the ground state.
    BellEdgeFidelity,
}

impl FigureOfMerit {
    /// Target state over `basis`.
    pub fn target(&self, basis: &Basis) -> Result<StateVector> {
        match self {
            FigureOfMerit::GhzFidelity { phase } => StateVector::ghz(basis, *phase),
            FigureOfMerit::StateOverlap { pattern } => {
                let c = basis.geometry().parse_pattern(pattern)?;
                StateVector::basis_state(basis, c)
            }
            FigureOfMerit::BellEdgeFidelity => {
                let g = basis.geometry();
                let n = g.n_sites;
                if n < 2 {
                    return Err(Error::invalid("n_sites", "edge pair needs two sites"));
                }
                let left = basis.index_of(g.site_mask(1));
                let right = basis.index_of(g.site_mask(n));
                match (left, right) {
                    (Some(l), Some(r)) => {
                        let mut v = alloc::vec![Complex64::new(0.0, 0.0); basis.len()];
                        v[l] = Complex64::new(FRAC_1_SQRT_2, 0.0);
                        v[r] = Complex64::new(FRAC_1_SQRT_2, 0.0);
                        Ok(StateVector::from_amplitudes(v))
                    }
                    _ => Err(Error::invalid(
                        "basis",
                        "edge configurations are truncated away",
                    )),
                }
            }
        }
    }
}

/// Scores pulses. One call is one figure-of-merit evaluation.
pub trait FomEvaluator {
    fn evaluate(&mut self, pulse: &Pulse) -> Result<f64>;
}

impl<F: FnMut(&Pulse) -> Result<f64>> FomEvaluator for F {
    fn evaluate(&mut self, pulse: &Pulse) -> Result<f64> {
        self(pulse)
    }
}

/// Noiseless simulation: evolve an initial state and project on a target.
#[derive(Clone, Debug)]
pub struct SimulatedFom {
    model: DriveModel,
    initial: Vec<Complex64>,
    target: Vec<Complex64>,
    pub options: EvolveOptions,
}

impl SimulatedFom {
    /// `initial` and `target` are given over the parent basis of `model` and
    /// projected into its space.
    pub fn new(
        model: DriveModel,
        initial: &StateVector,
        target: &StateVector,
        options: EvolveOptions,
    ) -> Result<Self> {
        let initial = model.from_parent(&initial.amplitudes)?;
        let target = model.from_parent(&target.amplitudes)?;
        Ok(SimulatedFom {
            model,
            initial,
            target,
            options,
        })
    }

    pub fn model(&self) -> &DriveModel {
        &self.model
    }

    /// Final state over the model space.
    pub fn final_state(&self, pulse: &Pulse) -> Result<Vec<Complex64>> {
        evolve(&self.model, pulse, &self.initial, &self.options)
    }
}

impl FomEvaluator for SimulatedFom {
    fn evaluate(&mut self, pulse: &Pulse) -> Result<f64> {
        let psi = self.final_state(pulse)?;
        Ok(inner(&self.target, &psi).norm_sqr().min(1.0))
    }
}
