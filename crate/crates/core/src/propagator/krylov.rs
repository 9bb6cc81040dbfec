use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::hamiltonian::Hamiltonian;
use crate::linalg::{norm_sqr, SymmetricEigen};
use crate::{Error, Result};

/// Settings of the Lanczos approximation to `exp(-i H dt) ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Largest Krylov dimension tried before the step is split.
    pub max_dim: usize,
    /// Absolute error target per step, relative to ‖ψ‖.
    pub tolerance: f64,
    /// How many times a step may be halved.
    pub max_splits: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            max_dim: 40,
            tolerance: 1e-12,
            max_splits: 12,
        }
    }
}

/// Reusable workspace for Krylov steps on vectors of one dimension.
pub struct KrylovStepper {
    opts: KrylovOptions,
    basis: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl KrylovStepper {
    pub fn new(dim: usize, opts: KrylovOptions) -> Self {
        KrylovStepper {
            opts,
            basis: (0..opts.max_dim.max(2) + 1)
                .map(|_| alloc::vec![Complex64::new(0.0, 0.0); dim])
                .collect(),
            w: alloc::vec![Complex64::new(0.0, 0.0); dim],
            alpha: Vec::with_capacity(opts.max_dim),
            beta: Vec::with_capacity(opts.max_dim),
        }
    }

    /// `ψ ← exp(-i H dt) ψ`. `step` is only used to label errors.
    pub fn advance(
        &mut self,
        h: &Hamiltonian<'_>,
        psi: &mut [Complex64],
        dt: f64,
        step: usize,
    ) -> Result<()> {
        if dt == 0.0 {
            return Ok(());
        }
        let mut pieces = 1usize;
        for _ in 0..=self.opts.max_splits {
            let sub = dt / pieces as f64;
            let mut trial = psi.to_vec();
            let mut ok = true;
            let mut worst = 0.0f64;
            for _ in 0..pieces {
                match self.single(h, &mut trial, sub) {
                    Ok(()) => {}
                    Err(est) => {
                        ok = false;
                        worst = est;
                        break;
                    }
                }
            }
            if ok {
                psi.copy_from_slice(&trial);
                return Ok(());
            }
            if pieces >= 1 << self.opts.max_splits {
                return Err(Error::Propagation {
                    step,
                    estimate: worst,
                });
            }
            pieces *= 2;
        }
        Err(Error::Propagation {
            step,
            estimate: f64::INFINITY,
        })
    }

    /// One Lanczos exponential; on failure returns the final error estimate.
    fn single(
        &mut self,
        h: &Hamiltonian<'_>,
        psi: &mut [Complex64],
        dt: f64,
    ) -> core::result::Result<(), f64> {
        let n = psi.len();
        let norm = norm_sqr(psi).sqrt();
        if norm == 0.0 {
            return Ok(());
        }
        let m_max = self.opts.max_dim.min(n).max(1);
        self.alpha.clear();
        self.beta.clear();
        for (v, p) in self.basis[0].iter_mut().zip(psi.iter()) {
            *v = p / norm;
        }
        let tol = self.opts.tolerance;
        let mut estimate = f64::INFINITY;
        let mut coeffs: Vec<Complex64> = Vec::new();
        for j in 0..m_max {
            h.apply(&self.basis[j], &mut self.w);
            let a: f64 = self.basis[j]
                .iter()
                .zip(&self.w)
                .map(|(v, w)| (v.conj() * w).re)
                .sum();
            self.alpha.push(a);
            for i in 0..n {
                let mut w = self.w[i] - self.basis[j][i] * a;
                if j > 0 {
                    w -= self.basis[j - 1][i] * self.beta[j - 1];
                }
                self.w[i] = w;
            }
            let b = norm_sqr(&self.w).sqrt();

            let breakdown = b <= 1e-13 * (a.abs() + self.beta.last().copied().unwrap_or(0.0) + 1.0);
            let check = breakdown || j + 1 == m_max || j >= 3;
            if check {
                coeffs = small_exponential(&self.alpha, &self.beta, dt);
                estimate = if breakdown || j + 1 == n {
                    0.0
                } else {
                    b * coeffs[j].norm()
                };
                if estimate <= tol {
                    break;
                }
            }
            if j + 1 == m_max {
                break;
            }
            self.beta.push(b);
            for (v, w) in self.basis[j + 1].iter_mut().zip(&self.w) {
                *v = w / b;
            }
        }
        if estimate > tol {
            return Err(estimate);
        }
        for p in psi.iter_mut() {
            *p = Complex64::new(0.0, 0.0);
        }
        for (k, c) in coeffs.iter().enumerate() {
            let c = c * norm;
            for (p, v) in psi.iter_mut().zip(&self.basis[k]) {
                *p += c * v;
            }
        }
        Ok(())
    }
}

/// `exp(-i T dt) e_1` for the Lanczos tridiagonal T.
fn small_exponential(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let eig =
        SymmetricEigen::tridiagonal(alpha, &beta[..m - 1]).expect("small tridiagonal eigenproblem");
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let w = Complex64::from_polar(eig.vector_component(0, k), -eig.values[k] * dt);
        for (i, o) in out.iter_mut().enumerate() {
            *o += w * eig.vector_component(i, k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis, ChainGeometry};
    use crate::hamiltonian::{build_hamiltonian, HamiltonianTerms, LocalShifts};
    use crate::linalg::SymmetricEigen;

    #[test]
    fn matches_dense_exponential() {
        let b = Basis::enumerate(ChainGeometry::blockaded(8)).unwrap();
        let t = HamiltonianTerms::new(&b, 24.0);
        let h = build_hamiltonian(&b, &t, &LocalShifts::preparation(8), 20.0, 7.0).unwrap();
        let n = b.len();
        let eig = SymmetricEigen::new(n, &h.to_dense()).unwrap();
        let u = eig.propagator(0.05);
        let mut psi = alloc::vec![Complex64::new(0.0, 0.0); n];
        psi[0] = Complex64::new(1.0, 0.0);
        let expect: Vec<Complex64> = (0..n).map(|i| u[i * n]).collect();
        let mut st = KrylovStepper::new(n, KrylovOptions::default());
        st.advance(&h, &mut psi, 0.05, 0).unwrap();
        let err: f64 = psi
            .iter()
            .zip(&expect)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn long_step_splits() {
        let b = Basis::enumerate(ChainGeometry::blockaded(6)).unwrap();
        let t = HamiltonianTerms::new(&b, 24.0);
        let h = build_hamiltonian(&b, &t, &LocalShifts::zeros(6), 30.0, -100.0).unwrap();
        let mut psi = alloc::vec![Complex64::new(0.0, 0.0); b.len()];
        psi[0] = Complex64::new(1.0, 0.0);
        let opts = KrylovOptions {
            max_dim: 8,
            ..KrylovOptions::default()
        };
        let mut st = KrylovStepper::new(b.len(), opts);
        st.advance(&h, &mut psi, 1.0, 0).unwrap();
        assert!((norm_sqr(&psi) - 1.0).abs() < 1e-10);
    }
}
