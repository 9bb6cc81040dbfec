use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::{DetectionModel, ShotSet};
use crate::basis::{Basis, Config};
use crate::{Error, Result};

/// How detected bitstrings are binned before inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// N + 1 groups by total excitation number k.
    ExcitationCount,
    /// Groups by (k, M) with M the staggered magnetization, ordered
    /// lexicographically.
    MagnetizationExcitation,
}

/// Label of one outcome group. `magnetization` is absent for
/// excitation-count grouping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupLabel {
    pub excitations: u32,
    pub magnetization: Option<i32>,
}

fn sublattice_sizes(n_sites: usize) -> (usize, usize) {
    // (odd sites, even sites), sites counted from 1
    (n_sites.div_ceil(2), n_sites / 2)
}

fn sublattice_counts(n_sites: usize, config: Config) -> (u32, u32) {
    let mut odd = 0;
    let mut even = 0;
    for i in 1..=n_sites {
        if config >> (n_sites - i) & 1 == 1 {
            if i % 2 == 1 {
                odd += 1;
            } else {
                even += 1;
            }
        }
    }
    (odd, even)
}

impl Grouping {
    /// Group labels in storage order.
    pub fn labels(&self, n_sites: usize) -> Vec<GroupLabel> {
        match self {
            Grouping::ExcitationCount => (0..=n_sites as u32)
                .map(|k| GroupLabel {
                    excitations: k,
                    magnetization: None,
                })
                .collect(),
            Grouping::MagnetizationExcitation => {
                let (no, ne) = sublattice_sizes(n_sites);
                let mut v = Vec::with_capacity((no + 1) * (ne + 1));
                for a in 0..=no {
                    for b in 0..=ne {
                        v.push(km_label(n_sites, a as u32, b as u32));
                    }
                }
                v.sort();
                v
            }
        }
    }

    pub fn n_groups(&self, n_sites: usize) -> usize {
        match self {
            Grouping::ExcitationCount => n_sites + 1,
            Grouping::MagnetizationExcitation => {
                let (no, ne) = sublattice_sizes(n_sites);
                (no + 1) * (ne + 1)
            }
        }
    }

    /// Storage index of the group containing `config`.
    pub fn group_of(&self, n_sites: usize, config: Config) -> usize {
        let (a, b) = sublattice_counts(n_sites, config);
        match self {
            Grouping::ExcitationCount => (a + b) as usize,
            Grouping::MagnetizationExcitation => km_index(n_sites, a as usize, b as usize),
        }
    }

    /// Indices of the groups holding the two GHZ components, when they are
    /// resolved by this grouping.
    pub fn ghz_groups(&self, n_sites: usize) -> Option<(usize, usize)> {
        if n_sites % 2 != 0 {
            return None;
        }
        match self {
            Grouping::ExcitationCount => None,
            Grouping::MagnetizationExcitation => {
                let h = n_sites / 2;
                // A excites the even sublattice, Ā the odd one.
                Some((km_index(n_sites, 0, h), km_index(n_sites, h, 0)))
            }
        }
    }

    /// Exact group probabilities of a state over `basis`.
    pub fn distribution(&self, basis: &Basis, psi: &[Complex64]) -> Result<Vec<f64>> {
        if psi.len() != basis.len() {
            return Err(Error::Shape {
                context: "group distribution",
                expected: basis.len(),
                found: psi.len(),
            });
        }
        let n = basis.n_sites();
        let mut w = alloc::vec![0.0; self.n_groups(n)];
        for (c, a) in basis.configs().iter().zip(psi) {
            w[self.group_of(n, *c)] += a.norm_sqr();
        }
        Ok(w)
    }

    /// Shot counts per group.
    pub fn counts(&self, shots: &ShotSet) -> Vec<u64> {
        let mut w = alloc::vec![0u64; self.n_groups(shots.n_sites)];
        for &s in &shots.shots {
            w[self.group_of(shots.n_sites, s)] += 1;
        }
        w
    }
}

fn km_label(n_sites: usize, a: u32, b: u32) -> GroupLabel {
    let (no, ne) = sublattice_sizes(n_sites);
    // odd sites contribute −(2n − 1), even sites +(2n − 1)
    let m = -(2 * a as i32 - no as i32) + (2 * b as i32 - ne as i32);
    GroupLabel {
        excitations: a + b,
        magnetization: Some(m),
    }
}

/// Position of the (a, b) sublattice-count group in lexicographic (k, M)
/// order. Within fixed k, M grows with b.
fn km_index(n_sites: usize, a: usize, b: usize) -> usize {
    let (no, ne) = sublattice_sizes(n_sites);
    let k = a + b;
    let width = |kk: usize| {
        let lo = kk.saturating_sub(no);
        let hi = kk.min(ne);
        hi + 1 - lo
    };
    let before: usize = (0..k).map(width).sum();
    before + b - k.saturating_sub(no)
}

/// Column-stochastic matrix: `get(detected, true)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n: usize,
    /// Row-major n × n.
    pub data: Vec<f64>,
}

impl ConfusionMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = alloc::vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        ConfusionMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, detected: usize, truth: usize) -> f64 {
        self.data[detected * self.n + truth]
    }

    /// W = M V.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                self.data[r * self.n..(r + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(m, x)| m * x)
                    .sum()
            })
            .collect()
    }

    /// Largest deviation of a column sum from 1.
    pub fn stochastic_defect(&self) -> f64 {
        (0..self.n)
            .map(|c| ((0..self.n).map(|r| self.get(r, c)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    // Multiplicative recursion; stable for the small n used here.
    let mut v = alloc::vec![0.0; n + 1];
    v[0] = 1.0;
    for m in 1..=n {
        for j in (1..=m).rev() {
            v[j] = v[j] * (1.0 - p) + v[j - 1] * p;
        }
        v[0] *= 1.0 - p;
    }
    v
}

/// P(detected count | true count) on `size` sites: the true excitations
/// survive binomially with 1 − p01 and the empty sites light up binomially
/// with p10.
fn count_channel(size: usize, model: &DetectionModel) -> Vec<f64> {
    let n = size + 1;
    let mut m = alloc::vec![0.0; n * n];
    for k in 0..=size {
        let kept = binomial_pmf(k, 1.0 - model.p01);
        let gained = binomial_pmf(size - k, model.p10);
        for (i, pk) in kept.iter().enumerate() {
            for (j, pg) in gained.iter().enumerate() {
                m[(i + j) * n + k] += pk * pg;
            }
        }
    }
    m
}

pub fn confusion_matrix(
    grouping: Grouping,
    n_sites: usize,
    model: &DetectionModel,
) -> Result<ConfusionMatrix> {
    if n_sites == 0 || n_sites > crate::basis::MAX_SITES {
        return Err(Error::invalid("n_sites", "out of range"));
    }
    model.validate()?;
    match grouping {
        Grouping::ExcitationCount => Ok(ConfusionMatrix {
            n: n_sites + 1,
            data: count_channel(n_sites, model),
        }),
        Grouping::MagnetizationExcitation => {
            let (no, ne) = sublattice_sizes(n_sites);
            let (co, ce) = (count_channel(no, model), count_channel(ne, model));
            let g = grouping.n_groups(n_sites);
            let mut data = alloc::vec![0.0; g * g];
            for a in 0..=no {
                for b in 0..=ne {
                    let col = km_index(n_sites, a, b);
                    for a2 in 0..=no {
                        let pa = co[a2 * (no + 1) + a];
                        if pa == 0.0 {
                            continue;
                        }
                        for b2 in 0..=ne {
                            data[km_index(n_sites, a2, b2) * g + col] += pa * ce[b2 * (ne + 1) + b];
                        }
                    }
                }
            }
            Ok(ConfusionMatrix { n: g, data })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_channel() {
        let m = DetectionModel::new(0.1, 0.2).unwrap();
        let c = confusion_matrix(Grouping::ExcitationCount, 1, &m).unwrap();
        for (a, b) in c.data.iter().zip([0.9, 0.2, 0.1, 0.8]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn km_labels_are_sorted_and_indexed() {
        for n in 1..=9 {
            let g = Grouping::MagnetizationExcitation;
            let labels = g.labels(n);
            assert_eq!(labels.len(), g.n_groups(n));
            for c in 0..(1u64 << n) {
                let k = c.count_ones();
                let m =
                    crate::basis::staggered_magnetization(&crate::basis::ChainGeometry::full(n), c);
                let l = labels[g.group_of(n, c)];
                assert_eq!(l.excitations, k);
                assert_eq!(l.magnetization, Some(m));
            }
        }
    }
}
