use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::{DriveModel, Pulse};
use crate::propagator::{evolve_observed, lowest_spectrum, EvolveOptions, SpectrumSlice};
use crate::{Error, Result};

/// Overlaps of ψ(t) with the `m` lowest instantaneous eigenstates, on
/// `samples + 1` uniformly spaced times (rounded to the step grid).
pub fn eigenpopulation_trace(
    model: &DriveModel,
    pulse: &Pulse,
    initial: &[Complex64],
    m: usize,
    samples: usize,
    opts: &EvolveOptions,
) -> Result<Vec<SpectrumSlice>> {
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    let (steps, _) = crate::propagator::step_grid(pulse.duration_us, opts.dt_us)?;
    let samples = samples.max(1).min(steps.max(1));
    let wanted: Vec<usize> = (0..=samples)
        .map(|j| (j * steps + samples / 2) / samples)
        .collect();
    let mut out = Vec::with_capacity(wanted.len());
    let mut failure = None;
    let mut next = 0;
    evolve_observed(model, pulse, initial, opts, |step, t, psi| {
        if failure.is_some() || next >= wanted.len() || step != wanted[next] {
            return;
        }
        while next < wanted.len() && wanted[next] == step {
            next += 1;
        }
        let slice = pulse.sample_controls(t).and_then(|(om, de)| {
            let h = model.hamiltonian(om, de);
            lowest_spectrum(&h, m.min(h.dim()), t)
        });
        match slice {
            Ok(s) => out.push(s.with_overlaps(psi)),
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Summary of the equivalent layered gate circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCircuitEstimate {
    pub layers: usize,
    pub total_time_us: f64,
    pub per_layer_fidelity: f64,
}

/// A central Bell pair (a blockade-enhanced π pulse, 1/(2√2 Ω)) followed by
/// N/2 − 1 layers of simultaneous local π pulses (1/(2Ω) each) that spread
/// the entanglement outwards. `omega_max_mhz` is Ω/2π.
pub fn gate_circuit_time_estimate(
    n_sites: usize,
    omega_max_mhz: f64,
    target_fidelity: f64,
) -> Result<GateCircuitEstimate> {
    if n_sites < 2 || n_sites % 2 != 0 {
        return Err(Error::invalid(
            "n_sites",
            "gate circuit needs an even chain",
        ));
    }
    if !(omega_max_mhz > 0.0) {
        return Err(Error::invalid("omega_max_mhz", "must be positive"));
    }
    if !(target_fidelity > 0.0 && target_fidelity <= 1.0) {
        return Err(Error::invalid("target_fidelity", "must lie in (0, 1]"));
    }
    let layers = n_sites / 2;
    let pi_pulse = 1.0 / (2.0 * omega_max_mhz);
    Ok(GateCircuitEstimate {
        layers,
        total_time_us: pi_pulse / SQRT_2 + (layers - 1) as f64 * pi_pulse,
        per_layer_fidelity: target_fidelity.powf(1.0 / layers as f64),
    })
}
