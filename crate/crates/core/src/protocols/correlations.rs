use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, ChainGeometry, Config};
use crate::{Error, Result};

/// g2(i, j) = ⟨n_i n_j⟩ − ⟨n_i⟩⟨n_j⟩ and its average over i at fixed |i − j|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub n_sites: usize,
    /// Row-major N × N.
    pub matrix: Vec<f64>,
    /// Entry d is the mean of g2(i, i + d) over i.
    pub radial: Vec<f64>,
}

impl Correlations {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i - 1) * self.n_sites + (j - 1)]
    }
}

fn from_weights(
    geometry: &ChainGeometry,
    items: impl Iterator<Item = (Config, f64)>,
) -> Correlations {
    let n = geometry.n_sites;
    let mut single = alloc::vec![0.0; n];
    let mut pair = alloc::vec![0.0; n * n];
    let mut total = 0.0;
    let mut occ = Vec::with_capacity(n);
    for (c, w) in items {
        total += w;
        occ.clear();
        occ.extend(
            (1..=n)
                .filter(|&i| geometry.occupation(c, i) == 1)
                .map(|i| i - 1),
        );
        for &i in &occ {
            single[i] += w;
            for &j in &occ {
                pair[i * n + j] += w;
            }
        }
    }
    let norm = if total > 0.0 { 1.0 / total } else { 0.0 };
    let mut matrix = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            matrix[i * n + j] = pair[i * n + j] * norm - single[i] * single[j] * norm * norm;
        }
    }
    let radial = (0..n)
        .map(|d| {
            let k = n - d;
            (0..k).map(|i| matrix[i * n + i + d]).sum::<f64>() / k as f64
        })
        .collect();
    Correlations {
        n_sites: n,
        matrix,
        radial,
    }
}

/// Correlations of the computational-basis distribution of `psi`.
pub fn g2_from_state(basis: &Basis, psi: &[Complex64]) -> Result<Correlations> {
    if psi.len() != basis.len() {
        return Err(Error::Shape {
            context: "g2 state",
            expected: basis.len(),
            found: psi.len(),
        });
    }
    Ok(from_weights(
        basis.geometry(),
        basis
            .configs()
            .iter()
            .copied()
            .zip(psi.iter().map(|a| a.norm_sqr())),
    ))
}

/// Correlations estimated from measured bitstrings.
pub fn g2_from_shots(geometry: &ChainGeometry, shots: &[Config]) -> Result<Correlations> {
    if shots.is_empty() {
        return Err(Error::invalid("shots", "no shots"));
    }
    Ok(from_weights(geometry, shots.iter().map(|&c| (c, 1.0))))
}
