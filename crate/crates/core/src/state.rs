//! Pure states over a [`Basis`] and the distinguished GHZ-protocol states.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use num_traits::Float;

use crate::basis::{Basis, Config};
use crate::linalg::{inner, norm_sqr};
use crate::{Error, Result};

/// Complex amplitudes indexed by basis ordinal.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        StateVector { amplitudes }
    }

    /// The computational basis state `config`.
    pub fn basis_state(basis: &Basis, config: Config) -> Result<Self> {
        let j = basis
            .index_of(config)
            .ok_or_else(|| Error::invalid("config", "configuration is not in the basis"))?;
        let mut a = alloc::vec![Complex64::new(0.0, 0.0); basis.len()];
        a[j] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes: a })
    }

    /// |00…0⟩, the Ω → 0, Δ < 0 ground state.
    pub fn ground(basis: &Basis) -> Self {
        Self::basis_state(basis, 0).expect("vacuum is always admissible")
    }

    /// |A_N⟩ = |0101…⟩.
    pub fn antiferromagnet_a(basis: &Basis) -> Result<Self> {
        Self::basis_state(basis, basis.geometry().antiferromagnet_a())
    }

    /// |Ā_N⟩ = |1010…⟩.
    pub fn antiferromagnet_abar(basis: &Basis) -> Result<Self> {
        Self::basis_state(basis, basis.geometry().antiferromagnet_abar())
    }

    /// (|A_N⟩ + e^{iφ}|Ā_N⟩)/√2.
    pub fn ghz(basis: &Basis, phase: f64) -> Result<Self> {
        let (a, abar) = basis.ghz_components()?;
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); basis.len()];
        v[a] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        v[abar] = Complex64::from_polar(FRAC_1_SQRT_2, phase);
        Ok(StateVector { amplitudes: v })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Σ_n f(n) |ψ_n|².
    pub fn expectation_diagonal(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| f(j) * a.norm_sqr())
            .sum()
    }

    /// ⟨n_i⟩ for every site (1-based site i at index i − 1).
    pub fn site_occupations(&self, basis: &Basis) -> Vec<f64> {
        let g = basis.geometry();
        let mut occ = alloc::vec![0.0; g.n_sites];
        for (j, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            let c = basis.config(j);
            for (i, o) in occ.iter_mut().enumerate() {
                if g.occupation(c, i + 1) == 1 {
                    *o += p;
                }
            }
        }
        occ
    }

    pub fn check_len(&self, basis: &Basis) -> Result<()> {
        if self.len() != basis.len() {
            return Err(Error::Shape {
                context: "state vector",
                expected: basis.len(),
                found: self.len(),
            });
        }
        Ok(())
    }
}
