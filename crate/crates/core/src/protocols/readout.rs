//! Parity readout operations: the interacting resonant drive U_x and ideal
//! single-qubit rotations on the untruncated space.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, ChainGeometry};
use crate::hamiltonian::{DriveModel, HamiltonianTerms, LocalShifts};
use crate::linalg::SymmetricEigen;
use crate::propagator::{evolve_constant, EvolveOptions};
use crate::units::to_angular;
use crate::{Error, Result};

/// Single-qubit rotation exp(−i θ/2 (cos φ σ_x + sin φ σ_y)) as a row-major
/// 2×2 matrix in the (|0⟩, |1⟩) basis.
pub fn rotation(theta: f64, phase: f64) -> [Complex64; 4] {
    let (s, c) = (0.5 * theta).sin_cos();
    let i = Complex64::new(0.0, 1.0);
    let off = -i * s;
    [
        Complex64::new(c, 0.0),
        off * Complex64::from_polar(1.0, -phase),
        off * Complex64::from_polar(1.0, phase),
        Complex64::new(c, 0.0),
    ]
}

/// Applies a 2×2 gate to site `site` (1-based) of a state over the full 2^N
/// space, in place.
pub fn apply_single_site(
    geometry: &ChainGeometry,
    psi: &mut [Complex64],
    site: usize,
    gate: &[Complex64; 4],
) {
    let mask = geometry.site_mask(site) as usize;
    for c in 0..psi.len() {
        if c & mask == 0 {
            let (a0, a1) = (psi[c], psi[c | mask]);
            psi[c] = gate[0] * a0 + gate[1] * a1;
            psi[c | mask] = gate[2] * a0 + gate[3] * a1;
        }
    }
}

/// Dense 2^N × 2^N matrix of a product of identical single-site gates on
/// `sites`.
pub fn product_gate_matrix(
    geometry: &ChainGeometry,
    sites: &[usize],
    gate: &[Complex64; 4],
) -> Vec<Complex64> {
    let d = 1usize << geometry.n_sites;
    let mut u = alloc::vec![Complex64::new(0.0, 0.0); d * d];
    let mut col = alloc::vec![Complex64::new(0.0, 0.0); d];
    for j in 0..d {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        for &s in sites {
            apply_single_site(geometry, &mut col, s, gate);
        }
        for i in 0..d {
            u[i * d + j] = col[i];
        }
    }
    u
}

/// Which parity readout to apply after the phase accumulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReadoutSpec {
    /// Resonant drive of the whole interacting chain for `duration_us`.
    Interacting { omega_mhz: f64, duration_us: f64 },
    /// Ideal π/2 rotation about x on every atom.
    IdealPiHalf,
}

/// Readout prepared for repeated use on states over one basis.
pub enum Readout {
    Interacting {
        model: DriveModel,
        omega: f64,
        duration_us: f64,
        options: EvolveOptions,
        parity: Vec<f64>,
    },
    Ideal {
        full: Basis,
        parity: Vec<f64>,
    },
}

impl Readout {
    pub fn new(
        basis: &Basis,
        spec: ReadoutSpec,
        v_mhz: f64,
        options: EvolveOptions,
    ) -> Result<Self> {
        match spec {
            ReadoutSpec::Interacting {
                omega_mhz,
                duration_us,
            } => {
                if !(duration_us >= 0.0) || !(omega_mhz >= 0.0) {
                    return Err(Error::invalid(
                        "readout",
                        "omega and duration must be non-negative",
                    ));
                }
                let terms = HamiltonianTerms::new(basis, v_mhz);
                let model = DriveModel::new(basis, &terms, &LocalShifts::zeros(basis.n_sites()))?;
                Ok(Readout::Interacting {
                    model,
                    omega: to_angular(omega_mhz),
                    duration_us,
                    options,
                    parity: parities(basis),
                })
            }
            ReadoutSpec::IdealPiHalf => {
                if basis.n_sites() > 24 {
                    return Err(Error::Capacity {
                        size: 1 << basis.n_sites(),
                        limit: 1 << 24,
                    });
                }
                let full = Basis::enumerate(ChainGeometry::full(basis.n_sites()))?;
                let parity = parities(&full);
                Ok(Readout::Ideal { full, parity })
            }
        }
    }

    /// Transforms a state over the source basis into the measured state and
    /// the parity eigenvalues of the space it lives in.
    pub fn apply(&self, basis: &Basis, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            Readout::Interacting {
                model,
                omega,
                duration_us,
                options,
                ..
            } => evolve_constant(model, *omega, 0.0, *duration_us, psi, options),
            Readout::Ideal { full, .. } => {
                let mut v = basis.embed_into(full, psi)?;
                let gate = rotation(FRAC_PI_2, 0.0);
                for s in 1..=full.n_sites() {
                    apply_single_site(full.geometry(), &mut v, s, &gate);
                }
                Ok(v)
            }
        }
    }

    pub fn parity(&self) -> &[f64] {
        match self {
            Readout::Interacting { parity, .. } | Readout::Ideal { parity, .. } => parity,
        }
    }

    /// Dense unitary mapping the source basis into the measured space
    /// (rows: measured space, columns: source basis).
    pub fn dense_unitary(&self, basis: &Basis) -> Result<Vec<Complex64>> {
        match self {
            Readout::Interacting {
                model,
                omega,
                duration_us,
                ..
            } => {
                let h = model.hamiltonian(*omega, 0.0);
                let eig = SymmetricEigen::new(h.dim(), &h.to_dense())?;
                Ok(eig.propagator(*duration_us))
            }
            Readout::Ideal { full, .. } => {
                let all: Vec<usize> = (1..=full.n_sites()).collect();
                let u = product_gate_matrix(full.geometry(), &all, &rotation(FRAC_PI_2, 0.0));
                let d = full.len();
                let cols: Vec<usize> = basis
                    .configs()
                    .iter()
                    .map(|&c| full.index_of(c).expect("full space"))
                    .collect();
                let mut out = alloc::vec![Complex64::new(0.0, 0.0); d * cols.len()];
                for i in 0..d {
                    for (j, &c) in cols.iter().enumerate() {
                        out[i * cols.len() + j] = u[i * d + c];
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn output_dim(&self) -> usize {
        self.parity().len()
    }
}

fn parities(basis: &Basis) -> Vec<f64> {
    (0..basis.len()).map(|j| basis.parity(j) as f64).collect()
}

/// Σ_n p_n |ψ_n|².
pub fn parity_expectation(basis: &Basis, psi: &[Complex64]) -> Result<f64> {
    if psi.len() != basis.len() {
        return Err(Error::Shape {
            context: "parity expectation",
            expected: basis.len(),
            found: psi.len(),
        });
    }
    Ok(psi
        .iter()
        .enumerate()
        .map(|(j, a)| basis.parity(j) as f64 * a.norm_sqr())
        .sum())
}

/// Evolves `psi` under the resonant interacting drive (Δ = 0, no shifts).
pub fn apply_ux(
    basis: &Basis,
    psi: &[Complex64],
    omega_mhz: f64,
    duration_us: f64,
    v_mhz: f64,
) -> Result<Vec<Complex64>> {
    let r = Readout::new(
        basis,
        ReadoutSpec::Interacting {
            omega_mhz,
            duration_us,
        },
        v_mhz,
        EvolveOptions::default(),
    )?;
    r.apply(basis, psi)
}

/// |⟨U Ā|P|U A⟩|: the parity oscillation amplitude a perfect GHZ input
/// would show under `readout`.
pub fn ghz_contrast(basis: &Basis, readout: &Readout) -> Result<f64> {
    let (a, abar) = basis.ghz_components()?;
    let mut ea = alloc::vec![Complex64::new(0.0, 0.0); basis.len()];
    ea[a] = Complex64::new(1.0, 0.0);
    let mut eb = alloc::vec![Complex64::new(0.0, 0.0); basis.len()];
    eb[abar] = Complex64::new(1.0, 0.0);
    let ua = readout.apply(basis, &ea)?;
    let ub = readout.apply(basis, &eb)?;
    let p = readout.parity();
    Ok(ub
        .iter()
        .zip(&ua)
        .zip(p)
        .map(|((x, y), s)| x.conj() * y * *s)
        .sum::<Complex64>()
        .norm())
}

/// Scans U_x durations on a uniform grid and returns (best duration, contrast).
pub fn optimal_ux_duration(
    basis: &Basis,
    omega_mhz: f64,
    v_mhz: f64,
    max_duration_us: f64,
    step_us: f64,
) -> Result<(f64, f64)> {
    if !(step_us > 0.0) || !(max_duration_us > 0.0) {
        return Err(Error::invalid("step_us", "grid must be positive"));
    }
    let (a, abar) = basis.ghz_components()?;
    let terms = HamiltonianTerms::new(basis, v_mhz);
    let model = DriveModel::new(basis, &terms, &LocalShifts::zeros(basis.n_sites()))?;
    let h = model.hamiltonian(to_angular(omega_mhz), 0.0);
    let parity = parities(basis);
    let mut ua = alloc::vec![Complex64::new(0.0, 0.0); basis.len()];
    ua[a] = Complex64::new(1.0, 0.0);
    let mut ub = alloc::vec![Complex64::new(0.0, 0.0); basis.len()];
    ub[abar] = Complex64::new(1.0, 0.0);
    let steps = (max_duration_us / step_us).round() as usize;
    let mut stepper = crate::propagator::KrylovStepper::new(basis.len(), Default::default());
    let sub = (step_us / 1e-3).ceil().max(1.0) as usize;
    let mut best = (0.0, 0.0);
    for k in 1..=steps {
        for _ in 0..sub {
            stepper.advance(&h, &mut ua, step_us / sub as f64, k)?;
            stepper.advance(&h, &mut ub, step_us / sub as f64, k)?;
        }
        let c = ub
            .iter()
            .zip(&ua)
            .zip(&parity)
            .map(|((x, y), s)| x.conj() * y * *s)
            .sum::<Complex64>()
            .norm();
        if c > best.1 {
            best = (k as f64 * step_us, c);
        }
    }
    Ok(best)
}
