//! The driven Rydberg-chain Hamiltonian
//!
//! ```text
//! H = (Ω/2) Σ_i σ_x^(i) − Σ_i (Δ + δ_i) n_i + Σ_{i<j} V_ij n_i n_j
//! ```
//!
//! over a truncated [`Basis`], together with the control pulses and static
//! light-shift patterns that parametrize it.

mod pulse;
mod shifts;

pub use pulse::{window, Control, ControlBounds, CrabTerm, Pulse, Waveform};
pub use shifts::{
    LocalShifts, EDGE_ISOLATION_MHZ, EDGE_SHIFT_LONG_MHZ, EDGE_SHIFT_SHORT_MHZ,
    STAGGERED_PROBE_MHZ, THIRD_SITE_SHIFT_MHZ,
};

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::basis::{Basis, ChainGeometry, Config, SymmetrizedBasis};
use crate::linalg::{Csr, CsrBuilder};
use crate::units::{to_angular, Mhz};
use crate::{Error, Result};

/// Nearest-neighbour interaction strength V/2π in MHz.
pub const DEFAULT_V_MHZ: f64 = 24.0;

/// Range-limited pair strengths, rad/µs: entry `i * range + d - 1` couples
/// 0-based site i to site i + d.
fn pair_strengths(g: &ChainGeometry, v_mhz: f64, multipliers: Option<&[f64]>) -> (usize, Vec<f64>) {
    let n = g.n_sites;
    let range = g.interaction_range.min(n.saturating_sub(1));
    let spacing: Vec<f64> = match multipliers {
        Some(m) => m.iter().map(|&x| x.powf(-1.0 / 6.0)).collect(),
        None => alloc::vec![1.0; n.saturating_sub(1)],
    };
    let v = to_angular(v_mhz);
    let mut pair_strength = alloc::vec![0.0; n * range.max(1)];
    for i in 0..n {
        let mut dist = 0.0;
        for d in 1..=range {
            if i + d >= n {
                break;
            }
            dist += spacing[i + d - 1];
            pair_strength[i * range + d - 1] = v / dist.powi(6);
        }
    }
    (range, pair_strength)
}

fn config_interaction(
    g: &ChainGeometry,
    range: usize,
    pair_strength: &[f64],
    c: Config,
    sites: &mut Vec<usize>,
) -> f64 {
    sites.clear();
    sites.extend(
        (1..=g.n_sites)
            .filter(|&i| g.occupation(c, i) == 1)
            .map(|i| i - 1),
    );
    let mut e = 0.0;
    for (a, &si) in sites.iter().enumerate() {
        for &sj in &sites[a + 1..] {
            let d = sj - si;
            if d > range {
                break;
            }
            e += pair_strength[si * range + d - 1];
        }
    }
    e
}

/// Σ_{i<j} V_ij n_i n_j of one configuration in rad/µs, with optional bond
/// multipliers as in [`HamiltonianTerms::with_bond_multipliers`].
pub fn interaction_energy(
    g: &ChainGeometry,
    v_mhz: f64,
    multipliers: Option<&[f64]>,
    config: Config,
) -> f64 {
    let (range, strengths) = pair_strengths(g, v_mhz, multipliers);
    config_interaction(g, range, &strengths, config, &mut Vec::new())
}

/// Control-independent pieces of the Hamiltonian over a basis.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    v_mhz: f64,
    coupling: Csr,
    interaction: Vec<f64>,
}

impl HamiltonianTerms {
    /// Uniform chain spacing.
    pub fn new(basis: &Basis, v_mhz: f64) -> Self {
        Self::build(basis, v_mhz, None)
    }

    /// Chain whose nearest-neighbour couplings are scaled bond by bond.
    ///
    /// A multiplier `m_b` on bond (b, b+1) corresponds to a local spacing
    /// `m_b^(-1/6)`; longer-range pairs use the summed spacing, so
    /// V_ij = V / (Σ_b m_b^(-1/6))^6.
    pub fn with_bond_multipliers(basis: &Basis, v_mhz: f64, multipliers: &[f64]) -> Result<Self> {
        let bonds = basis.n_sites().saturating_sub(1);
        if multipliers.len() != bonds {
            return Err(Error::Shape {
                context: "bond multipliers",
                expected: bonds,
                found: multipliers.len(),
            });
        }
        if multipliers.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::invalid("bond multipliers", "must be positive"));
        }
        Ok(Self::build(basis, v_mhz, Some(multipliers)))
    }

    fn build(basis: &Basis, v_mhz: f64, multipliers: Option<&[f64]>) -> Self {
        let g = basis.geometry();
        let n = g.n_sites;
        let (range, pair_strength) = pair_strengths(g, v_mhz, multipliers);
        let mut interaction = Vec::with_capacity(basis.len());
        let mut builder = CsrBuilder::new(basis.len());
        let mut sites = Vec::with_capacity(n);
        for &c in basis.configs() {
            let e = config_interaction(g, range, &pair_strength, c, &mut sites);
            interaction.push(e);

            for i in 1..=n {
                if let Some(k) = basis.index_of(c ^ g.site_mask(i)) {
                    builder.push(k, 0.5);
                }
            }
            builder.finish_row();
        }
        HamiltonianTerms {
            v_mhz,
            coupling: builder.build(),
            interaction,
        }
    }

    #[inline]
    pub fn v_mhz(&self) -> f64 {
        self.v_mhz
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.interaction.len()
    }

    /// Σ_i σ_x^(i)/2 restricted to the basis.
    #[inline]
    pub fn coupling(&self) -> &Csr {
        &self.coupling
    }

    /// Σ_{i<j} V_ij n_i n_j per configuration, rad/µs.
    #[inline]
    pub fn interaction(&self) -> &[f64] {
        &self.interaction
    }
}

/// Hamiltonian at fixed controls, applied matrix-free.
#[derive(Clone, Debug)]
pub struct Hamiltonian<'a> {
    pub diagonal: Vec<f64>,
    pub omega: f64,
    pub coupling: &'a Csr,
}

impl Hamiltonian<'_> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diagonal) {
            *yi = xi * *d;
        }
        if self.omega != 0.0 {
            self.coupling.mul_add_complex(self.omega, x, y);
        }
    }

    /// `y = H x` for real vectors.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diagonal) {
            *yi = xi * d;
        }
        if self.omega != 0.0 {
            self.coupling.mul_add_real(self.omega, x, y);
        }
    }

    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut y = alloc::vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, &mut y);
        crate::linalg::inner(psi, &y).re
    }

    /// Dense row-major copy (real symmetric).
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut m = self.coupling.to_dense();
        for v in m.iter_mut() {
            *v *= self.omega;
        }
        for i in 0..n {
            m[i * n + i] += self.diagonal[i];
        }
        m
    }

    /// 1-norm bound ‖H‖.
    pub fn norm_bound(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim() {
            let (_, vals) = self.coupling.row(r);
            let off: f64 = vals.iter().map(|v| v.abs()).sum::<f64>() * self.omega.abs();
            worst = worst.max(self.diagonal[r].abs() + off);
        }
        worst
    }
}

/// Assembles H for controls `omega`, `delta` (rad/µs) over `basis`.
pub fn build_hamiltonian<'a>(
    basis: &Basis,
    terms: &'a HamiltonianTerms,
    shifts: &LocalShifts,
    omega: f64,
    delta: f64,
) -> Result<Hamiltonian<'a>> {
    check_dims(basis, terms, shifts)?;
    let g = basis.geometry();
    let shift: Vec<f64> = shifts.mhz.iter().map(|&s| to_angular(s)).collect();
    let diagonal = basis
        .configs()
        .iter()
        .zip(terms.interaction())
        .map(|(&c, &e)| {
            let mut d = e;
            for i in 1..=g.n_sites {
                if g.occupation(c, i) == 1 {
                    d -= delta + shift[i - 1];
                }
            }
            d
        })
        .collect();
    Ok(Hamiltonian {
        diagonal,
        omega,
        coupling: terms.coupling(),
    })
}

fn check_dims(basis: &Basis, terms: &HamiltonianTerms, shifts: &LocalShifts) -> Result<()> {
    if terms.dim() != basis.len() {
        return Err(Error::Shape {
            context: "hamiltonian terms",
            expected: basis.len(),
            found: terms.dim(),
        });
    }
    if shifts.len() != basis.n_sites() {
        return Err(Error::Shape {
            context: "local shifts",
            expected: basis.n_sites(),
            found: shifts.len(),
        });
    }
    Ok(())
}

/// Diagonal generator of the staggered field (δ_p/2) Σ_i (−1)^i σ_z^(i):
/// entries 2π δ_p M_n / 2 in rad/µs.
pub fn staggered_field_generator(basis: &Basis, delta_p: Mhz) -> Vec<f64> {
    let w = delta_p.angular();
    (0..basis.len())
        .map(|j| w * basis.magnetization(j) as f64 / 2.0)
        .collect()
}

/// Precomputed control-independent parts of H in the space the dynamics
/// runs in (the full basis or one reflection sector):
/// `H(Ω, Δ) = static + Ω·coupling − Δ·excitations`.
#[derive(Clone, Debug)]
pub struct DriveModel {
    coupling: Csr,
    static_diagonal: Vec<f64>,
    excitations: Vec<f64>,
    sector: Option<SymmetrizedBasis>,
}

impl DriveModel {
    pub fn new(basis: &Basis, terms: &HamiltonianTerms, shifts: &LocalShifts) -> Result<Self> {
        let h = build_hamiltonian(basis, terms, shifts, 0.0, 0.0)?;
        let excitations = (0..basis.len())
            .map(|j| basis.excitations(j) as f64)
            .collect();
        Ok(DriveModel {
            coupling: terms.coupling().clone(),
            static_diagonal: h.diagonal,
            excitations,
            sector: None,
        })
    }

    /// Builds the model restricted to one reflection sector. The diagonal
    /// part must be reflection symmetric, otherwise the restriction would not
    /// be exact.
    pub fn in_sector(
        basis: &Basis,
        terms: &HamiltonianTerms,
        shifts: &LocalShifts,
        sector: SymmetrizedBasis,
    ) -> Result<Self> {
        let full = Self::new(basis, terms, shifts)?;
        let scale = full
            .static_diagonal
            .iter()
            .fold(1.0f64, |m, x| m.max(x.abs()));
        for j in 0..basis.len() {
            let p = basis.partner(j);
            if (full.static_diagonal[j] - full.static_diagonal[p]).abs() > 1e-12 * scale {
                return Err(Error::invalid(
                    "shifts",
                    "sector dynamics requires a reflection-symmetric Hamiltonian",
                ));
            }
        }
        if sector.parent_len() != basis.len() {
            return Err(Error::Shape {
                context: "sector parent",
                expected: basis.len(),
                found: sector.parent_len(),
            });
        }
        let dim = sector.len();
        let mut builder = CsrBuilder::new(dim);
        let mut static_diagonal = Vec::with_capacity(dim);
        let mut excitations = Vec::with_capacity(dim);
        for a in 0..dim {
            let comps: Vec<(usize, f64)> = sector.components(a).collect();
            let (first, _) = comps[0];
            static_diagonal.push(full.static_diagonal[first]);
            excitations.push(full.excitations[first]);
            for &(p, cp) in &comps {
                let (cols, vals) = full.coupling.row(p);
                for (&q, &v) in cols.iter().zip(vals) {
                    if let Some((b, cq)) = sector.lookup(q) {
                        builder.push(b, cp * cq * v);
                    }
                }
            }
            builder.finish_row();
        }
        Ok(DriveModel {
            coupling: builder.build(),
            static_diagonal,
            excitations,
            sector: Some(sector),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.static_diagonal.len()
    }

    #[inline]
    pub fn sector(&self) -> Option<&SymmetrizedBasis> {
        self.sector.as_ref()
    }

    #[inline]
    pub fn coupling(&self) -> &Csr {
        &self.coupling
    }

    /// Total excitation number per state of the model space.
    #[inline]
    pub fn excitations(&self) -> &[f64] {
        &self.excitations
    }

    #[inline]
    pub fn static_diagonal(&self) -> &[f64] {
        &self.static_diagonal
    }

    /// H at controls `omega`, `delta` in rad/µs.
    pub fn hamiltonian(&self, omega: f64, delta: f64) -> Hamiltonian<'_> {
        Hamiltonian {
            diagonal: self
                .static_diagonal
                .iter()
                .zip(&self.excitations)
                .map(|(s, k)| s - delta * k)
                .collect(),
            omega,
            coupling: &self.coupling,
        }
    }

    /// Model-space amplitudes lifted to the parent basis.
    pub fn to_parent(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.sector {
            Some(s) => s.embed(amplitudes),
            None => Ok(amplitudes.to_vec()),
        }
    }

    /// Parent-basis amplitudes projected into the model space.
    pub fn from_parent(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.sector {
            Some(s) => s.project(amplitudes),
            None => {
                if amplitudes.len() != self.dim() {
                    return Err(Error::Shape {
                        context: "model state",
                        expected: self.dim(),
                        found: amplitudes.len(),
                    });
                }
                Ok(amplitudes.to_vec())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ChainGeometry;
    use core::f64::consts::TAU;

    #[test]
    fn two_site_elements() {
        let b = Basis::enumerate(ChainGeometry::new(2, 1, 3).unwrap()).unwrap();
        let t = HamiltonianTerms::new(&b, 24.0);
        let h = build_hamiltonian(&b, &t, &LocalShifts::zeros(2), TAU * 5.0, 0.0).unwrap();
        let d = h.to_dense();
        let i00 = b.index_of(0b00).unwrap();
        let i10 = b.index_of(0b10).unwrap();
        let i11 = b.index_of(0b11).unwrap();
        assert!((d[i00 * 4 + i10] - TAU * 2.5).abs() < 1e-12);
        assert!((d[i11 * 4 + i11] - TAU * 24.0).abs() < 1e-12);
    }

    #[test]
    fn next_nearest_neighbour_tail() {
        let b = Basis::enumerate(ChainGeometry::blockaded(3)).unwrap();
        let t = HamiltonianTerms::new(&b, 24.0);
        let j = b.index_of(0b101).unwrap();
        assert!((t.interaction()[j] - TAU * 0.375).abs() < 1e-12);
    }

    #[test]
    fn single_pair_costs_v() {
        let b = Basis::enumerate(ChainGeometry::full(5)).unwrap();
        let t = HamiltonianTerms::new(&b, 24.0);
        let j = b.index_of(0b01100).unwrap();
        assert!((t.interaction()[j] - TAU * 24.0).abs() < 1e-12);
    }

    #[test]
    fn staggered_generator_values() {
        let b = Basis::enumerate(ChainGeometry::blockaded(4)).unwrap();
        let g = staggered_field_generator(&b, Mhz(3.8));
        let a = b.index_of(0b0101).unwrap();
        let abar = b.index_of(0b1010).unwrap();
        assert!((g[a] - TAU * 7.6).abs() < 1e-12);
        assert!((g[abar] + TAU * 7.6).abs() < 1e-12);
        assert_eq!(g[b.index_of(0).unwrap()], 0.0);
    }

    #[test]
    fn shape_errors() {
        let b = Basis::enumerate(ChainGeometry::blockaded(4)).unwrap();
        let t = HamiltonianTerms::new(&b, 24.0);
        assert!(matches!(
            build_hamiltonian(&b, &t, &LocalShifts::zeros(3), 1.0, 0.0),
            Err(Error::Shape { .. })
        ));
        let other = Basis::enumerate(ChainGeometry::blockaded(5)).unwrap();
        assert!(build_hamiltonian(&other, &t, &LocalShifts::zeros(5), 1.0, 0.0).is_err());
    }

    #[test]
    fn uniform_multipliers_reproduce_uniform_chain() {
        let b = Basis::enumerate(ChainGeometry::new(6, 2, 5).unwrap()).unwrap();
        let a = HamiltonianTerms::new(&b, 24.0);
        let m = HamiltonianTerms::with_bond_multipliers(&b, 24.0, &[1.0; 5]).unwrap();
        for (x, y) in a.interaction().iter().zip(m.interaction()) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
        }
    }
}
