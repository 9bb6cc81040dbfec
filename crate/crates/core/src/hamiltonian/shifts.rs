use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default edge light shift for chains of up to eight atoms (MHz).
pub const EDGE_SHIFT_SHORT_MHZ: f64 = -4.5;
/// Edge light shift for chains longer than eight atoms (MHz).
pub const EDGE_SHIFT_LONG_MHZ: f64 = -6.0;
/// Extra shift on the third site from each edge for chains longer than eight atoms (MHz).
pub const THIRD_SITE_SHIFT_MHZ: f64 = -1.5;
/// Staggered probe shift used for parity oscillations (MHz).
pub const STAGGERED_PROBE_MHZ: f64 = 3.8;
/// Edge shift that isolates the end atoms during entanglement distribution (MHz).
pub const EDGE_ISOLATION_MHZ: f64 = 6.0;

/// Static per-site detuning offsets δ_i in MHz, added to the global detuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalShifts {
    pub mhz: Vec<f64>,
}

impl LocalShifts {
    pub fn zeros(n_sites: usize) -> Self {
        LocalShifts {
            mhz: alloc::vec![0.0; n_sites],
        }
    }

    pub fn from_mhz(mhz: Vec<f64>) -> Self {
        LocalShifts { mhz }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.mhz.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.mhz.is_empty()
    }

    /// The same shift on sites 1 and N.
    pub fn edges(n_sites: usize, shift_mhz: f64) -> Self {
        let mut s = Self::zeros(n_sites);
        if n_sites > 0 {
            s.mhz[0] = shift_mhz;
            s.mhz[n_sites - 1] = shift_mhz;
        }
        s
    }

    /// Preparation pattern: −4.5 MHz on the edges for N ≤ 8; for N > 8,
    /// −6 MHz on the edges plus −1.5 MHz on sites 4 and N − 3.
    pub fn preparation(n_sites: usize) -> Self {
        if n_sites <= 8 {
            return Self::edges(n_sites, EDGE_SHIFT_SHORT_MHZ);
        }
        let mut s = Self::edges(n_sites, EDGE_SHIFT_LONG_MHZ);
        s.mhz[3] += THIRD_SITE_SHIFT_MHZ;
        s.mhz[n_sites - 4] += THIRD_SITE_SHIFT_MHZ;
        s
    }

    /// Detuning pattern equivalent (up to a constant) to the staggered field
    /// (δ_p/2) Σ_i (−1)^i σ_z^(i): δ_i = −(−1)^i δ_p.
    pub fn staggered(n_sites: usize, delta_p_mhz: f64) -> Self {
        LocalShifts {
            mhz: (1..=n_sites)
                .map(|i| {
                    if i % 2 == 0 {
                        -delta_p_mhz
                    } else {
                        delta_p_mhz
                    }
                })
                .collect(),
        }
    }

    /// Edge isolation shift for entanglement distribution.
    pub fn edge_isolation(n_sites: usize, shift_mhz: f64) -> Self {
        Self::edges(n_sites, shift_mhz)
    }

    pub fn add(&self, other: &LocalShifts) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Shape {
                context: "local shift sum",
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(LocalShifts {
            mhz: self
                .mhz
                .iter()
                .zip(&other.mhz)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn is_reflection_symmetric(&self, tol: f64) -> bool {
        let n = self.len();
        (0..n).all(|i| (self.mhz[i] - self.mhz[n - 1 - i]).abs() <= tol)
    }

    pub fn is_reflection_antisymmetric(&self, tol: f64) -> bool {
        let n = self.len();
        (0..n).all(|i| (self.mhz[i] + self.mhz[n - 1 - i]).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_symmetry() {
        for n in [4, 8, 12, 20] {
            assert!(LocalShifts::preparation(n).is_reflection_symmetric(0.0));
            assert!(LocalShifts::edge_isolation(n, 6.0).is_reflection_symmetric(0.0));
            let st = LocalShifts::staggered(n, 3.8);
            assert!(st.is_reflection_antisymmetric(0.0));
            assert!(!st.is_reflection_symmetric(1e-9));
        }
    }

    #[test]
    fn long_chain_recipe() {
        let s = LocalShifts::preparation(12);
        assert_eq!(s.mhz[0], -6.0);
        assert_eq!(s.mhz[11], -6.0);
        assert_eq!(s.mhz[3], -1.5);
        assert_eq!(s.mhz[8], -1.5);
        assert_eq!(s.mhz.iter().filter(|&&x| x != 0.0).count(), 4);
        assert_eq!(
            LocalShifts::preparation(8).mhz,
            alloc::vec![-4.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -4.5]
        );
    }
}
