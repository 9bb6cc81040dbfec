use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::hamiltonian::Hamiltonian;
use crate::linalg::{dot, SymmetricEigen};
use crate::{Error, Result};

/// Above this dimension the sparse Lanczos path is used.
pub const DENSE_SPECTRUM_LIMIT: usize = 1200;

/// Lowest eigenpairs of one instantaneous Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSlice {
    /// Schedule parameter s or time t at which H was evaluated.
    pub parameter: f64,
    /// Absolute eigenvalues, ascending.
    pub energies: Vec<f64>,
    /// Real normalized eigenvectors, one per energy.
    pub vectors: Vec<Vec<f64>>,
    /// |⟨E_n|ψ⟩|², when a state was supplied.
    pub overlaps: Option<Vec<f64>>,
}

impl SpectrumSlice {
    /// E_n − E_0.
    pub fn relative_energies(&self) -> Vec<f64> {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        self.energies.iter().map(|e| e - e0).collect()
    }

    pub fn gap(&self) -> Option<f64> {
        if self.energies.len() < 2 {
            None
        } else {
            Some(self.energies[1] - self.energies[0])
        }
    }

    /// Number of states within `tol` of the ground energy.
    pub fn ground_multiplicity(&self, tol: f64) -> usize {
        let e0 = self.energies[0];
        self.energies.iter().take_while(|&&e| e - e0 <= tol).count()
    }

    pub fn with_overlaps(mut self, psi: &[Complex64]) -> Self {
        self.overlaps = Some(overlaps(&self.vectors, psi));
        self
    }

    /// Population of the (possibly degenerate) ground space.
    pub fn ground_space_population(&self, psi: &[Complex64], tol: f64) -> f64 {
        let g = self.ground_multiplicity(tol);
        overlaps(&self.vectors[..g], psi).iter().sum()
    }
}

fn overlaps(vectors: &[Vec<f64>], psi: &[Complex64]) -> Vec<f64> {
    vectors
        .iter()
        .map(|v| {
            v.iter()
                .zip(psi)
                .map(|(a, p)| p * *a)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect()
}

/// The `m` lowest eigenpairs of `h`.
///
/// Diagonal Hamiltonians (Ω = 0) are solved exactly by sorting, which keeps
/// every member of a degenerate ground space. Otherwise dense tridiagonal QL
/// is used up to [`DENSE_SPECTRUM_LIMIT`], and Lanczos with full
/// reorthogonalization beyond it; the latter resolves one vector per exactly
/// degenerate eigenspace.
pub fn lowest_spectrum(h: &Hamiltonian<'_>, m: usize, parameter: f64) -> Result<SpectrumSlice> {
    let n = h.dim();
    if m == 0 || m > n {
        return Err(Error::invalid(
            "m",
            alloc::format!("need 1 <= m <= {n}, got {m}"),
        ));
    }
    if h.omega == 0.0 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| h.diagonal[a].total_cmp(&h.diagonal[b]).then(a.cmp(&b)));
        let energies = order[..m].iter().map(|&j| h.diagonal[j]).collect();
        let vectors = order[..m]
            .iter()
            .map(|&j| {
                let mut v = alloc::vec![0.0; n];
                v[j] = 1.0;
                v
            })
            .collect();
        return Ok(SpectrumSlice {
            parameter,
            energies,
            vectors,
            overlaps: None,
        });
    }
    if n <= DENSE_SPECTRUM_LIMIT {
        let eig = SymmetricEigen::new(n, &h.to_dense())?;
        return Ok(SpectrumSlice {
            parameter,
            energies: eig.values[..m].to_vec(),
            vectors: (0..m).map(|k| eig.vector(k)).collect(),
            overlaps: None,
        });
    }
    lanczos_lowest(h, m, parameter, 1e-10)
}

fn lanczos_lowest(
    h: &Hamiltonian<'_>,
    m: usize,
    parameter: f64,
    tol: f64,
) -> Result<SpectrumSlice> {
    let n = h.dim();
    let scale = h.norm_bound().max(1e-300);
    let cap = n.min((20 * m).clamp(300, 2000));
    // Deterministic, generic start vector.
    let mut q: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 * 0.7548776662).fract() - 0.5))
        .collect();
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nq);

    let mut basis: Vec<Vec<f64>> = alloc::vec![q];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = alloc::vec![0.0; n];
    let mut last: Option<(SymmetricEigen, f64)> = None;
    loop {
        let j = basis.len() - 1;
        h.apply_real(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        // Full reorthogonalization, twice.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        let k = alpha.len();
        if k >= m && (k % 10 == 0 || k == cap || b < 1e-12 * scale) {
            let eig = SymmetricEigen::tridiagonal(&alpha, &beta)?;
            let converged = (0..m).all(|r| {
                (b * eig.vector_component(k - 1, r)).abs() <= tol * scale.max(eig.values[r].abs())
            });
            if converged || b < 1e-12 * scale || k == cap {
                last = Some((eig, b));
                if !converged && k == cap && b >= 1e-12 * scale {
                    let worst = (0..m)
                        .map(|r| (b * last.as_ref().unwrap().0.vector_component(k - 1, r)).abs())
                        .fold(0.0, f64::max);
                    return Err(Error::Spectral(alloc::format!(
                        "Lanczos not converged after {k} vectors (residual {worst:.3e})"
                    )));
                }
                break;
            }
        }
        if b < 1e-12 * scale {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let (eig, _) = match last {
        Some(x) => x,
        None => {
            let eig = SymmetricEigen::tridiagonal(&alpha, &beta)?;
            (eig, 0.0)
        }
    };
    let k = alpha.len();
    let m = m.min(k);
    let vectors = (0..m)
        .map(|r| {
            let mut v = alloc::vec![0.0; n];
            for (i, bv) in basis.iter().take(k).enumerate() {
                let c = eig.vector_component(i, r);
                for (x, y) in v.iter_mut().zip(bv) {
                    *x += c * y;
                }
            }
            let nv = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            v
        })
        .collect();
    Ok(SpectrumSlice {
        parameter,
        energies: eig.values[..m].to_vec(),
        vectors,
        overlaps: None,
    })
}
