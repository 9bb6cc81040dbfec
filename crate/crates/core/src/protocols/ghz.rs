use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::{Error, Result};

/// Populations of the two GHZ components, their coherence and the fidelity
///
/// ```text
/// F = (p_A + p_Ā)/2 + Re β,   β = ⟨A_N|ρ|Ā_N⟩.
/// ```
///
/// For a pure state β = ψ_A ψ_Ā*, so the relative phase φ of
/// (|A⟩ + e^{iφ}|Ā⟩)/√2 appears as arg β = −φ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzDecomposition {
    pub p_a: f64,
    pub p_abar: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub fidelity: f64,
}

impl GhzDecomposition {
    pub fn from_parts(p_a: f64, p_abar: f64, beta: Complex64) -> Self {
        GhzDecomposition {
            p_a,
            p_abar,
            beta_re: beta.re,
            beta_im: beta.im,
            fidelity: 0.5 * (p_a + p_abar) + beta.re,
        }
    }

    #[inline]
    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.beta_re, self.beta_im)
    }

    #[inline]
    pub fn target_population(&self) -> f64 {
        self.p_a + self.p_abar
    }
}

/// Exact decomposition of a pure state over `basis`.
pub fn exact_ghz_decomposition(basis: &Basis, psi: &[Complex64]) -> Result<GhzDecomposition> {
    check(basis.len(), psi.len())?;
    let (a, abar) = basis.ghz_components()?;
    Ok(GhzDecomposition::from_parts(
        psi[a].norm_sqr(),
        psi[abar].norm_sqr(),
        psi[a] * psi[abar].conj(),
    ))
}

fn check(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Shape {
            context: "state over basis",
            expected,
            found,
        });
    }
    Ok(())
}

/// Dense density matrix (row-major) over a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn pure(psi: &[Complex64]) -> Self {
        let n = psi.len();
        let mut data = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = psi[i] * psi[j].conj();
            }
        }
        DensityMatrix { dim: n, data }
    }

    /// Σ_k w_k |ψ_k⟩⟨ψ_k| with the weights normalized to one.
    pub fn mixture(states: &[(f64, Vec<Complex64>)]) -> Result<Self> {
        let n = states
            .first()
            .map(|s| s.1.len())
            .ok_or_else(|| Error::invalid("states", "empty mixture"))?;
        let total: f64 = states.iter().map(|s| s.0).sum();
        if !(total > 0.0) || states.iter().any(|s| s.0 < 0.0) {
            return Err(Error::invalid(
                "weights",
                "must be non-negative with positive sum",
            ));
        }
        let mut rho = DensityMatrix {
            dim: n,
            data: alloc::vec![Complex64::new(0.0, 0.0); n * n],
        };
        for (w, psi) in states {
            check(n, psi.len())?;
            let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
            let scale = w / total / norm;
            for i in 0..n {
                for j in 0..n {
                    rho.data[i * n + j] += psi[i] * psi[j].conj() * scale;
                }
            }
        }
        Ok(rho)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// U ρ U† for a dense row-major unitary.
    pub fn conjugate(&self, u: &[Complex64]) -> Result<Self> {
        let n = self.dim;
        check(n * n, u.len())?;
        let mut tmp = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let uik = u[i * n + k];
                if uik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    tmp[i * n + j] += uik * self.data[k * n + j];
                }
            }
        }
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += tmp[i * n + k] * u[j * n + k].conj();
                }
                out[i * n + j] = acc;
            }
        }
        Ok(DensityMatrix { dim: n, data: out })
    }

    /// Amplitude-index map into a wider basis with the same sites.
    pub fn embed(&self, from: &Basis, into: &Basis) -> Result<Self> {
        check(from.len(), self.dim)?;
        let map: Vec<usize> = from
            .configs()
            .iter()
            .map(|&c| {
                into.index_of(c)
                    .ok_or_else(|| Error::invalid("basis", "target basis is narrower"))
            })
            .collect::<Result<_>>()?;
        let m = into.len();
        let mut data = alloc::vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..self.dim {
            for j in 0..self.dim {
                data[map[i] * m + map[j]] = self.get(i, j);
            }
        }
        Ok(DensityMatrix { dim: m, data })
    }

    pub fn ghz_decomposition(&self, basis: &Basis) -> Result<GhzDecomposition> {
        check(basis.len(), self.dim)?;
        let (a, abar) = basis.ghz_components()?;
        Ok(GhzDecomposition::from_parts(
            self.get(a, a).re,
            self.get(abar, abar).re,
            self.get(a, abar),
        ))
    }

    /// Random state concentrated on the two GHZ components: a mixture of
    /// `rank` pure states, each with random complex weights on A and Ā and a
    /// smaller random admixture of every other configuration.
    pub fn random_ghz_like<R: Rng + ?Sized>(
        basis: &Basis,
        rank: usize,
        leakage: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let (a, abar) = basis.ghz_components()?;
        let mut states = Vec::with_capacity(rank.max(1));
        for _ in 0..rank.max(1) {
            let mut psi: Vec<Complex64> = (0..basis.len())
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(re, im) * leakage
                })
                .collect();
            for idx in [a, abar] {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                psi[idx] = Complex64::new(re, im);
            }
            let w: f64 = rng.random_range(0.05..1.0);
            states.push((w, psi));
        }
        Self::mixture(&states)
    }
}

/// ⟨GHZ_0|ρ|GHZ_0⟩ evaluated directly, for cross-checks.
pub fn direct_ghz_fidelity(basis: &Basis, rho: &DensityMatrix) -> Result<f64> {
    let (a, abar) = basis.ghz_components()?;
    let s = rho.get(a, a) + rho.get(abar, abar) + rho.get(a, abar) + rho.get(abar, a);
    Ok(0.5 * s.re)
}

/// F ≥ (P + C)/2 from the target population P and fitted contrast C.
pub fn fidelity_lower_bound(target_population: f64, contrast: f64) -> f64 {
    0.5 * (target_population + contrast.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::ChainGeometry;
    use crate::state::StateVector;

    #[test]
    fn perfect_and_mixed() {
        let b = Basis::enumerate(ChainGeometry::blockaded(6)).unwrap();
        let g = StateVector::ghz(&b, 0.0).unwrap();
        let d = exact_ghz_decomposition(&b, &g.amplitudes).unwrap();
        assert!((d.fidelity - 1.0).abs() < 1e-15);
        assert!((d.beta_re - 0.5).abs() < 1e-15);
        let a = StateVector::antiferromagnet_a(&b).unwrap().amplitudes;
        let abar = StateVector::antiferromagnet_abar(&b).unwrap().amplitudes;
        let rho = DensityMatrix::mixture(&[(1.0, a), (1.0, abar)]).unwrap();
        let d = rho.ghz_decomposition(&b).unwrap();
        assert!((d.fidelity - 0.5).abs() < 1e-15);
    }

    #[test]
    fn table_row_identity() {
        assert!((fidelity_lower_bound(0.782, 0.301) - 0.5415).abs() < 1e-12);
    }
}
