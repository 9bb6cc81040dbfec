use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::krylov::{KrylovOptions, KrylovStepper};
use crate::hamiltonian::{DriveModel, Pulse};
use crate::{Error, Result};

/// Default time step, µs.
pub const DEFAULT_DT_US: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Requested step (µs). The step actually used is τ/⌈τ/dt⌉, so it never
    /// exceeds the request and always tiles the pulse exactly.
    pub dt_us: f64,
    pub krylov: KrylovOptions,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            dt_us: DEFAULT_DT_US,
            krylov: KrylovOptions::default(),
        }
    }
}

/// Number of steps and actual step for a pulse of length `duration`.
pub fn step_grid(duration: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt_us", "must be positive"));
    }
    if duration == 0.0 {
        return Ok((0, 0.0));
    }
    let n = (duration / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok((n, duration / n as f64))
}

/// Propagates `psi` (over the model space) through `pulse` with midpoint
/// sampling of the controls.
pub fn evolve(
    model: &DriveModel,
    pulse: &Pulse,
    psi: &[Complex64],
    opts: &EvolveOptions,
) -> Result<Vec<Complex64>> {
    evolve_observed(model, pulse, psi, opts, |_, _, _| {})
}

/// As [`evolve`], calling `observer(step, t, ψ(t))` at t = 0 and after every
/// step.
pub fn evolve_observed(
    model: &DriveModel,
    pulse: &Pulse,
    psi: &[Complex64],
    opts: &EvolveOptions,
    mut observer: impl FnMut(usize, f64, &[Complex64]),
) -> Result<Vec<Complex64>> {
    pulse.validate()?;
    if psi.len() != model.dim() {
        return Err(Error::Shape {
            context: "evolve state",
            expected: model.dim(),
            found: psi.len(),
        });
    }
    let (steps, dt) = step_grid(pulse.duration_us, opts.dt_us)?;
    let mut state = psi.to_vec();
    observer(0, 0.0, &state);
    let mut stepper = KrylovStepper::new(model.dim(), opts.krylov);
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let (om, de) = pulse.sample_controls(t_mid)?;
        let h = model.hamiltonian(om, de);
        stepper.advance(&h, &mut state, dt, k)?;
        observer(k + 1, (k + 1) as f64 * dt, &state);
    }
    Ok(state)
}

/// Propagation under constant controls (rad/µs) for `duration` µs.
pub fn evolve_constant(
    model: &DriveModel,
    omega: f64,
    delta: f64,
    duration: f64,
    psi: &[Complex64],
    opts: &EvolveOptions,
) -> Result<Vec<Complex64>> {
    if psi.len() != model.dim() {
        return Err(Error::Shape {
            context: "evolve state",
            expected: model.dim(),
            found: psi.len(),
        });
    }
    if !(duration >= 0.0) {
        return Err(Error::invalid("duration", "must be non-negative"));
    }
    let (steps, dt) = step_grid(duration, opts.dt_us)?;
    let h = model.hamiltonian(omega, delta);
    let mut state = psi.to_vec();
    let mut stepper = KrylovStepper::new(model.dim(), opts.krylov);
    for k in 0..steps {
        stepper.advance(&h, &mut state, dt, k)?;
    }
    Ok(state)
}

/// Exact evolution under a diagonal generator: ψ_n ← e^{−i g_n T} ψ_n.
pub fn evolve_under_diagonal(
    psi: &[Complex64],
    generator: &[f64],
    t: f64,
) -> Result<Vec<Complex64>> {
    if psi.len() != generator.len() {
        return Err(Error::Shape {
            context: "diagonal generator",
            expected: psi.len(),
            found: generator.len(),
        });
    }
    Ok(psi
        .iter()
        .zip(generator)
        .map(|(a, &g)| {
            if g == 0.0 {
                *a
            } else {
                a * Complex64::from_polar(1.0, -g * t)
            }
        })
        .collect())
}
