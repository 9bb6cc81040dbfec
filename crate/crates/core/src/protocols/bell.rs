//! Entanglement distribution: prepare a GHZ state, pin the edge atoms with a
//! local shift, sweep the bulk back to the ground state and read out the
//! remaining edge Bell pair.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ghz::DensityMatrix;
use super::parity::{fit_fixed_frequency, ParityFit};
use super::readout::{apply_single_site, rotation};
use crate::basis::{symmetry_sector, Basis, ChainGeometry, Sector};
use crate::control::{FigureOfMerit, SimulatedFom};
use crate::hamiltonian::{
    ControlBounds, DriveModel, HamiltonianTerms, LocalShifts, Pulse, EDGE_ISOLATION_MHZ,
};
use crate::propagator::{evolve, EvolveOptions};
use crate::state::StateVector;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellConfig {
    /// Shift on sites 1 and N during the reverse sweep, MHz.
    pub edge_shift_mhz: f64,
    /// Keep the preparation shifts on top of the edge shift.
    pub keep_preparation_shifts: bool,
    /// Readout phases sampled uniformly over [0, 2π).
    pub phase_points: usize,
    pub options_dt_us: f64,
}

impl Default for BellConfig {
    fn default() -> Self {
        BellConfig {
            edge_shift_mhz: EDGE_ISOLATION_MHZ,
            keep_preparation_shifts: false,
            phase_points: 24,
            options_dt_us: crate::propagator::DEFAULT_DT_US,
        }
    }
}

impl BellConfig {
    pub fn reverse_shifts(&self, n_sites: usize) -> Result<LocalShifts> {
        let edge = LocalShifts::edge_isolation(n_sites, self.edge_shift_mhz);
        if self.keep_preparation_shifts {
            edge.add(&LocalShifts::preparation(n_sites))
        } else {
            Ok(edge)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    /// ⟨n_i⟩ after the reverse sweep.
    pub site_populations: Vec<f64>,
    /// |⟨Ψ+ ⊗ 0_bulk|ψ⟩|² after the reverse sweep.
    pub psi_plus_fidelity: f64,
    /// Purity of the reduced edge-pair state after the reverse sweep.
    pub edge_purity: f64,
    /// Edge-pair pattern probabilities 00, 01, 10, 11 after the π/2 pulse.
    pub edge_patterns: [f64; 4],
    /// Probability of |0…0⟩ plus |10…01⟩ after the π/2 pulse.
    pub target_patterns: f64,
    /// |⟨Φ+ ⊗ 0_bulk|ψ⟩|² after the π/2 pulse.
    pub phi_plus_fidelity: f64,
    pub phases: Vec<f64>,
    /// ⟨σ_z^(1) σ_z^(N)⟩ after a second π/2 pulse at each phase.
    pub edge_parity: Vec<f64>,
    /// Fit at twice the readout phase.
    pub parity_fit: ParityFit,
    /// (target_patterns + contrast)/2.
    pub fidelity_bound: f64,
}

/// Ψ+ = (|10…0⟩ + |0…01⟩)/√2 over `basis`.
pub fn psi_plus(basis: &Basis) -> Result<StateVector> {
    FigureOfMerit::BellEdgeFidelity.target(basis)
}

/// State after the forward pulse from |0…0⟩, over the blockaded basis,
/// evolved in the even reflection sector.
pub fn forward_state(
    basis: &Basis,
    terms: &HamiltonianTerms,
    forward: &Pulse,
    opts: &EvolveOptions,
) -> Result<StateVector> {
    let n = basis.n_sites();
    let model = DriveModel::in_sector(
        basis,
        terms,
        &LocalShifts::preparation(n),
        symmetry_sector(basis, Sector::Even),
    )?;
    let psi0 = model.from_parent(&StateVector::ground(basis).amplitudes)?;
    let out = evolve(&model, forward, &psi0, opts)?;
    Ok(StateVector::from_amplitudes(model.to_parent(&out)?))
}

/// Figure of merit for optimizing the reverse sweep from `start`.
pub fn reverse_sweep_fom(
    basis: &Basis,
    terms: &HamiltonianTerms,
    start: &StateVector,
    cfg: &BellConfig,
    opts: EvolveOptions,
) -> Result<SimulatedFom> {
    let shifts = cfg.reverse_shifts(basis.n_sites())?;
    let model = DriveModel::in_sector(basis, terms, &shifts, symmetry_sector(basis, Sector::Even))?;
    SimulatedFom::new(model, start, &psi_plus(basis)?, opts)
}

/// Final detuning of the default reverse sweep, MHz. Far enough below
/// resonance that the bulk atoms are left in |0⟩ while the shifted edges
/// (Δ + 6 MHz) stay excited.
pub const REVERSE_END_MHZ: f64 = -10.0;

pub const REVERSE_DURATION_US: f64 = 1.1;

/// Guess for the reverse sweep: Ω_max[1 − cos¹²] with Δ from +20 MHz down to
/// `end_mhz`.
pub fn reverse_guess(duration_us: f64, end_mhz: f64) -> Pulse {
    Pulse::linear_ramp(duration_us, ControlBounds::default(), 20.0, end_mhz)
}

/// Runs the full protocol. With `reverse = None` the sweep is skipped.
pub fn bell_distribution_protocol(
    basis: &Basis,
    terms: &HamiltonianTerms,
    forward: &Pulse,
    reverse: Option<&Pulse>,
    cfg: &BellConfig,
) -> Result<BellReport> {
    let n = basis.n_sites();
    if n < 4 || n % 2 != 0 {
        return Err(Error::invalid(
            "n_sites",
            "entanglement distribution needs an even chain of at least 4",
        ));
    }
    if cfg.phase_points < 3 {
        return Err(Error::invalid("phase_points", "need at least three phases"));
    }
    let opts = EvolveOptions {
        dt_us: cfg.options_dt_us,
        ..EvolveOptions::default()
    };
    let mut psi = forward_state(basis, terms, forward, &opts)?;
    if let Some(rev) = reverse {
        let shifts = cfg.reverse_shifts(n)?;
        let model =
            DriveModel::in_sector(basis, terms, &shifts, symmetry_sector(basis, Sector::Even))?;
        let start = model.from_parent(&psi.amplitudes)?;
        let out = evolve(&model, rev, &start, &opts)?;
        psi = StateVector::from_amplitudes(model.to_parent(&out)?);
    }
    let site_populations = psi.site_occupations(basis);
    let psi_plus_fidelity = psi_plus(basis)?.overlap(&psi);

    let full = Basis::enumerate(ChainGeometry::full(n))?;
    let g = *full.geometry();
    let mut v = basis.embed_into(&full, &psi.amplitudes)?;
    let edge_purity = edge_reduced(&g, &v).purity();

    let half = rotation(FRAC_PI_2, 0.0);
    apply_single_site(&g, &mut v, 1, &half);
    apply_single_site(&g, &mut v, n, &half);

    let edges = g.site_mask(1) | g.site_mask(n);
    let mut edge_patterns = [0.0; 4];
    for (c, a) in v.iter().enumerate() {
        let c = c as u64;
        let k = 2 * g.occupation(c, 1) as usize + g.occupation(c, n) as usize;
        edge_patterns[k] += a.norm_sqr();
    }
    let target_patterns = v[0].norm_sqr() + v[edges as usize].norm_sqr();
    let phi_plus_fidelity = ((v[0] + v[edges as usize]) * FRAC_1_SQRT_2).norm_sqr();

    let phases: Vec<f64> = (0..cfg.phase_points)
        .map(|j| TAU * j as f64 / cfg.phase_points as f64)
        .collect();
    let mut edge_parity = Vec::with_capacity(phases.len());
    for &phi in &phases {
        let gate = rotation(FRAC_PI_2, phi);
        let mut w = v.clone();
        apply_single_site(&g, &mut w, 1, &gate);
        apply_single_site(&g, &mut w, n, &gate);
        let p: f64 = w
            .iter()
            .enumerate()
            .map(|(c, a)| {
                let c = c as u64;
                let z1 = 2.0 * g.occupation(c, 1) as f64 - 1.0;
                let zn = 2.0 * g.occupation(c, n) as f64 - 1.0;
                z1 * zn * a.norm_sqr()
            })
            .sum();
        edge_parity.push(p);
    }
    // cos(2φ − θ) written as a "frequency" 1/π in the time-domain fitter.
    let parity_fit = fit_fixed_frequency(&phases, &edge_parity, 1.0 / PI)?;
    Ok(BellReport {
        site_populations,
        psi_plus_fidelity,
        edge_purity,
        edge_patterns,
        target_patterns,
        phi_plus_fidelity,
        phases,
        edge_parity,
        fidelity_bound: 0.5 * (target_patterns + parity_fit.amplitude),
        parity_fit,
    })
}

/// Reduced density matrix of sites 1 and N from a full-space state, in the
/// pattern order 00, 01, 10, 11.
pub fn edge_reduced(geometry: &ChainGeometry, psi: &[Complex64]) -> DensityMatrix {
    let n = geometry.n_sites;
    let (m1, mn) = (
        geometry.site_mask(1) as usize,
        geometry.site_mask(n) as usize,
    );
    let mut data = alloc::vec![Complex64::new(0.0, 0.0); 16];
    let edge_index = |c: usize| 2 * ((c & m1 != 0) as usize) + (c & mn != 0) as usize;
    for bulk in 0..psi.len() {
        if bulk & (m1 | mn) != 0 {
            continue;
        }
        let comps = [bulk, bulk | mn, bulk | m1, bulk | m1 | mn];
        for &x in &comps {
            for &y in &comps {
                data[edge_index(x) * 4 + edge_index(y)] += psi[x] * psi[y].conj();
            }
        }
    }
    DensityMatrix { dim: 4, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_plus_parity_is_minus_cos_two_phi() {
        // Feed Ψ+ directly through the readout part of the protocol.
        let g = ChainGeometry::full(4);
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); 16];
        v[0b1000] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        v[0b0001] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let half = rotation(FRAC_PI_2, 0.0);
        apply_single_site(&g, &mut v, 1, &half);
        apply_single_site(&g, &mut v, 4, &half);
        assert!((v[0].norm_sqr() + v[0b1001].norm_sqr() - 1.0).abs() < 1e-14);
        for phi in [0.0, 0.4, 1.3, 2.9] {
            let gate = rotation(FRAC_PI_2, phi);
            let mut w = v.clone();
            apply_single_site(&g, &mut w, 1, &gate);
            apply_single_site(&g, &mut w, 4, &gate);
            let p: f64 = w
                .iter()
                .enumerate()
                .map(|(c, a)| {
                    let z1 = if c & 0b1000 != 0 { 1.0 } else { -1.0 };
                    let z4 = if c & 1 != 0 { 1.0 } else { -1.0 };
                    z1 * z4 * a.norm_sqr()
                })
                .sum();
            assert!((p + (2.0 * phi).cos()).abs() < 1e-12, "{phi} {p}");
        }
    }

    #[test]
    fn ghz_edges_are_mixed() {
        let b = Basis::enumerate(ChainGeometry::full(6)).unwrap();
        let s = StateVector::ghz(&b, 0.0).unwrap();
        let r = edge_reduced(b.geometry(), &s.amplitudes);
        assert!((r.trace() - 1.0).abs() < 1e-14);
        assert!((r.purity() - 0.5).abs() < 1e-14);
    }
}
