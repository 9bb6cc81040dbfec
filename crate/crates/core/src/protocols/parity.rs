//! Parity oscillations under a staggered phase and the coherence bound they
//! imply.
//!
//! The staggered field multiplies |n⟩ by e^{−iδT M_n/2}, so the coherence
//! between two configurations oscillates at (M_n − M_m)δ/2. Only the GHZ pair
//! reaches the extreme difference 2N, hence a fit at frequency Nδ isolates it.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::ghz::DensityMatrix;
use super::readout::Readout;
use crate::basis::Basis;
use crate::hamiltonian::staggered_field_generator;
use crate::linalg::solve_in_place;
use crate::propagator::evolve_under_diagonal;
use crate::units::Mhz;
use crate::{Error, Result};

/// Least-squares fit E(T) = C cos(2πfT − φ) + c at fixed f.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityFit {
    pub frequency_mhz: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityScan {
    pub times_us: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: ParityFit,
}

/// Uniform grid over one period of the slowest staggered beat, 1/δ_p, with
/// `8N` points. The fit frequency Nδ_p and every other beat frequency kδ_p
/// (|k| ≤ N) are then mutually orthogonal on the grid.
pub fn default_scan_times(n_sites: usize, delta_p_mhz: f64) -> Vec<f64> {
    let k = 8 * n_sites.max(1);
    let period = 1.0 / delta_p_mhz.abs();
    (0..k).map(|j| period * j as f64 / k as f64).collect()
}

/// Fit at a fixed frequency (MHz).
pub fn fit_fixed_frequency(times: &[f64], values: &[f64], frequency_mhz: f64) -> Result<ParityFit> {
    if times.len() != values.len() {
        return Err(Error::Shape {
            context: "parity fit",
            expected: times.len(),
            found: values.len(),
        });
    }
    let curve = || {
        times
            .iter()
            .copied()
            .zip(values.iter().copied())
            .collect::<Vec<_>>()
    };
    if times.len() < 3 {
        return Err(Error::fit("need at least three points", curve()));
    }
    let w = TAU * frequency_mhz;
    let mut ata = [0.0; 9];
    let mut atb = [0.0; 3];
    for (&t, &y) in times.iter().zip(values) {
        let row = [(w * t).cos(), (w * t).sin(), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i * 3 + j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let scale = ata.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut a = ata;
    if solve_in_place(3, &mut a, &mut atb).is_none() || scale == 0.0 {
        return Err(Error::fit("singular normal equations", curve()));
    }
    let [ca, sb, c] = atb;
    let rss: f64 = times
        .iter()
        .zip(values)
        .map(|(&t, &y)| {
            let r = y - (ca * (w * t).cos() + sb * (w * t).sin() + c);
            r * r
        })
        .sum();
    Ok(ParityFit {
        frequency_mhz,
        amplitude: (ca * ca + sb * sb).sqrt(),
        phase: sb.atan2(ca),
        offset: c,
        rms_residual: (rss / times.len() as f64).sqrt(),
    })
}

/// Fit with the frequency free: a grid search over `[lo, hi]` MHz followed
/// by golden-section refinement of the residual.
pub fn fit_free_frequency(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<ParityFit> {
    if !(hi > lo && lo > 0.0) {
        return Err(Error::invalid("frequency range", "need 0 < lo < hi"));
    }
    let rss = |f: f64| fit_fixed_frequency(times, values, f).map(|p| p.rms_residual);
    let grid = 2000;
    let mut best = (lo, f64::INFINITY);
    for j in 0..=grid {
        let f = lo + (hi - lo) * j as f64 / grid as f64;
        let r = rss(f)?;
        if r < best.1 {
            best = (f, r);
        }
    }
    let h = (hi - lo) / grid as f64;
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (rss(x1)?, rss(x2)?);
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = rss(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = rss(x2)?;
        }
    }
    fit_fixed_frequency(times, values, 0.5 * (a + b))
}

/// Parity after staggered phase accumulation for each time, for a pure state.
pub fn parity_oscillation_scan(
    basis: &Basis,
    psi: &[Complex64],
    delta_p: Mhz,
    readout: &Readout,
    times_us: &[f64],
) -> Result<ParityScan> {
    let n = basis.n_sites();
    if n % 2 != 0 {
        return Err(Error::invalid("n_sites", "parity scans need an even chain"));
    }
    let gen = staggered_field_generator(basis, delta_p);
    let parity = readout.parity();
    let mut values = Vec::with_capacity(times_us.len());
    for &t in times_us {
        let phased = evolve_under_diagonal(psi, &gen, t)?;
        let out = readout.apply(basis, &phased)?;
        let e: f64 = out.iter().zip(parity).map(|(a, p)| p * a.norm_sqr()).sum();
        values.push(e.clamp(-1.0, 1.0));
    }
    let fit = fit_fixed_frequency(times_us, &values, n as f64 * delta_p.0)?;
    Ok(ParityScan {
        times_us: times_us.to_vec(),
        values,
        fit,
    })
}

/// The same scan for a density matrix, using the Heisenberg-picture parity
/// O = U† P U so each time point costs one weighted sum.
pub fn density_parity_scan(
    basis: &Basis,
    rho: &DensityMatrix,
    delta_p: Mhz,
    readout: &Readout,
    times_us: &[f64],
) -> Result<ParityScan> {
    let n = basis.n_sites();
    if n % 2 != 0 {
        return Err(Error::invalid("n_sites", "parity scans need an even chain"));
    }
    let d = basis.len();
    if rho.dim != d {
        return Err(Error::Shape {
            context: "density scan",
            expected: d,
            found: rho.dim,
        });
    }
    let u = readout.dense_unitary(basis)?;
    let p = readout.parity();
    let m = p.len();
    // O_{jk} = Σ_i conj(U_ij) p_i U_ik
    let mut o = alloc::vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..m {
        if p[i] == 0.0 {
            continue;
        }
        for j in 0..d {
            let uij = u[i * d + j].conj() * p[i];
            if uij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..d {
                o[j * d + k] += uij * u[i * d + k];
            }
        }
    }
    let gen = staggered_field_generator(basis, delta_p);
    let mut values = Vec::with_capacity(times_us.len());
    for &t in times_us {
        let mut e = Complex64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                let phase = Complex64::from_polar(1.0, -(gen[k] - gen[j]) * t);
                // Tr(O D ρ D†) = Σ_{jk} O_{jk} ρ_{kj} e^{−i(g_k − g_j)t}
                e += o[j * d + k] * rho.get(k, j) * phase;
            }
        }
        values.push(e.re.clamp(-1.0, 1.0));
    }
    let fit = fit_fixed_frequency(times_us, &values, n as f64 * delta_p.0)?;
    Ok(ParityScan {
        times_us: times_us.to_vec(),
        values,
        fit,
    })
}

/// Lower bound on |β| and its phase from a fitted scan: |β| ≥ C/2, arg β = φ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceBound {
    pub magnitude: f64,
    pub phase: f64,
}

pub fn coherence_lower_bound(scan: &ParityScan) -> CoherenceBound {
    CoherenceBound {
        magnitude: (0.5 * scan.fit.amplitude).clamp(0.0, 0.5),
        phase: scan.fit.phase,
    }
}
