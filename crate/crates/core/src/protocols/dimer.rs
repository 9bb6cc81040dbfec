//! Spin-1 dimer picture of the parity readout.
//!
//! Neighbouring atoms (2j−1, 2j) form one three-level system with
//! |+⟩ = |10⟩, |0⟩ = |00⟩, |−⟩ = |01⟩ (|11⟩ is blockaded). The resonant drive
//! becomes (Ω/√2) Σ_j S_x^(j); neighbouring dimers interact through V when
//! the facing atoms are both excited (−_j +_{j+1}) and through V₂ for
//! (+_j +_{j+1}) and (−_j −_{j+1}).

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::Hamiltonian;
use crate::linalg::CsrBuilder;
use crate::propagator::{KrylovOptions, KrylovStepper};
use crate::units::to_angular;
use crate::{Error, Result};

const PLUS: usize = 0;
const ZERO: usize = 1;
const MINUS: usize = 2;

/// Largest supported chain of dimers (3^10 states).
pub const MAX_DIMERS: usize = 10;

/// Contrast |⟨U(−…−)|P|U(+…+)⟩| sampled against the rotation time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimerContrast {
    pub times_us: Vec<f64>,
    pub contrast: Vec<f64>,
    pub best_time_us: f64,
    pub best_contrast: f64,
}

fn digit(state: usize, j: usize) -> usize {
    (state / 3usize.pow(j as u32)) % 3
}

/// Contrast curve for `n_dimers` under drive Ω and couplings V, V₂ (all MHz),
/// on a uniform grid of `steps` intervals up to `max_time_us`.
pub fn dimer_model_contrast(
    n_dimers: usize,
    omega_mhz: f64,
    v_mhz: f64,
    v2_mhz: f64,
    max_time_us: f64,
    steps: usize,
) -> Result<DimerContrast> {
    if n_dimers == 0 || n_dimers > MAX_DIMERS {
        return Err(Error::invalid(
            "n_dimers",
            alloc::format!("must lie in 1..={MAX_DIMERS}"),
        ));
    }
    if !(max_time_us > 0.0) || steps == 0 {
        return Err(Error::invalid("max_time_us", "need a positive grid"));
    }
    let dim = 3usize.pow(n_dimers as u32);
    let (v, v2) = (to_angular(v_mhz), to_angular(v2_mhz));
    let mut builder = CsrBuilder::new(dim);
    let mut diagonal = Vec::with_capacity(dim);
    for s in 0..dim {
        let mut e = 0.0;
        for j in 0..n_dimers {
            let d = digit(s, j);
            let up = 3usize.pow(j as u32);
            // S_x/·: ⟨±|S_x|0⟩ = 1/√2; the prefactor Ω/√2 is applied via omega.
            if d == ZERO {
                builder.push(s - up, FRAC_1_SQRT_2);
                builder.push(s + up, FRAC_1_SQRT_2);
            } else {
                builder.push(s - d * up + ZERO * up, FRAC_1_SQRT_2);
            }
            if j + 1 < n_dimers {
                match (d, digit(s, j + 1)) {
                    (MINUS, PLUS) => e += v,
                    (PLUS, PLUS) | (MINUS, MINUS) => e += v2,
                    _ => {}
                }
            }
        }
        builder.finish_row();
        diagonal.push(e);
    }
    let coupling = builder.build();
    let h = Hamiltonian {
        diagonal,
        omega: to_angular(omega_mhz) * FRAC_1_SQRT_2,
        coupling: &coupling,
    };
    let parity: Vec<f64> = (0..dim)
        .map(|s| {
            let odd = (0..n_dimers).filter(|&j| digit(s, j) != ZERO).count();
            if odd % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let all = |d: usize| {
        (0..n_dimers)
            .map(|j| d * 3usize.pow(j as u32))
            .sum::<usize>()
    };
    let mut up = alloc::vec![Complex64::new(0.0, 0.0); dim];
    up[all(PLUS)] = Complex64::new(1.0, 0.0);
    let mut down = alloc::vec![Complex64::new(0.0, 0.0); dim];
    down[all(MINUS)] = Complex64::new(1.0, 0.0);

    let mut stepper = KrylovStepper::new(dim, KrylovOptions::default());
    let dt = max_time_us / steps as f64;
    let contrast_of = |a: &[Complex64], b: &[Complex64]| {
        b.iter()
            .zip(a)
            .zip(&parity)
            .map(|((x, y), p)| x.conj() * y * *p)
            .sum::<Complex64>()
            .norm()
    };
    let mut times = alloc::vec![0.0];
    let mut contrast = alloc::vec![contrast_of(&up, &down)];
    for k in 1..=steps {
        stepper.advance(&h, &mut up, dt, k)?;
        stepper.advance(&h, &mut down, dt, k)?;
        times.push(k as f64 * dt);
        contrast.push(contrast_of(&up, &down));
    }
    let (bi, &bc) = contrast
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, c)| {
            if *c > *acc.1 {
                (i, c)
            } else {
                acc
            }
        });
    Ok(DimerContrast {
        best_time_us: times[bi],
        best_contrast: bc,
        times_us: times,
        contrast,
    })
}
