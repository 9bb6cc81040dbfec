//! Simplex-constrained least squares: minimize ‖D(MV − W)‖² over V ≥ 0,
//! ΣV = 1, by a primal active-set method.

use alloc::vec::Vec;

use num_traits::Float;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, StandardNormal};
use serde::{Deserialize, Serialize};

use super::channel::{DetectionModel, ShotSet};
use super::grouping::{confusion_matrix, ConfusionMatrix, GroupLabel, Grouping};
use crate::linalg::solve_in_place;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceOptions {
    /// Per-group weights D². Unweighted when absent.
    pub weights: Option<Vec<f64>>,
    /// Zero selects 10·(groups) + 100.
    pub max_iterations: usize,
    /// Bound on the KKT residual.
    pub tolerance: f64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            weights: None,
            max_iterations: 0,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub v: Vec<f64>,
    /// ‖MV − W‖₂ (unweighted).
    pub residual_norm: f64,
    pub kkt_residual: f64,
    /// Groups held at zero at the solution.
    pub active_set: Vec<usize>,
    pub iterations: usize,
}

/// Measured and inferred group distributions together with the channel
/// used to relate them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupedDistribution {
    pub grouping: Grouping,
    pub n_sites: usize,
    pub labels: Vec<GroupLabel>,
    pub measured: Vec<f64>,
    pub inferred: Vec<f64>,
    pub matrix: ConfusionMatrix,
    pub diagnostics: InferenceResult,
}

impl GroupedDistribution {
    pub fn from_shots(
        shots: &ShotSet,
        grouping: Grouping,
        model: &DetectionModel,
        opts: &InferenceOptions,
    ) -> Result<Self> {
        if shots.is_empty() {
            return Err(Error::invalid("shots", "no shots to infer from"));
        }
        let counts = grouping.counts(shots);
        let total = shots.len() as f64;
        let measured: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
        Self::from_measured(measured, shots.n_sites, grouping, model, opts)
    }

    pub fn from_measured(
        measured: Vec<f64>,
        n_sites: usize,
        grouping: Grouping,
        model: &DetectionModel,
        opts: &InferenceOptions,
    ) -> Result<Self> {
        let matrix = confusion_matrix(grouping, n_sites, model)?;
        let diagnostics = infer_true_distribution(&measured, &matrix, opts)?;
        Ok(GroupedDistribution {
            grouping,
            n_sites,
            labels: grouping.labels(n_sites),
            inferred: diagnostics.v.clone(),
            measured,
            matrix,
            diagnostics,
        })
    }
}

fn normal_matrix(w: &[f64], m: &ConfusionMatrix, weights: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
    let n = m.n;
    let d = |r: usize| weights.map_or(1.0, |x| x[r]);
    let mut q = alloc::vec![0.0; n * n];
    let mut c = alloc::vec![0.0; n];
    for r in 0..n {
        let dr = d(r);
        let row = &m.data[r * n..(r + 1) * n];
        for i in 0..n {
            let a = row[i] * dr;
            if a == 0.0 {
                continue;
            }
            c[i] += a * w[r];
            for j in 0..n {
                q[i * n + j] += a * row[j];
            }
        }
    }
    (q, c)
}

/// Solves Q_FF x + ν 1 = c_F, Σx = 1 on the free set.
fn kkt_solve(q: &[f64], c: &[f64], n: usize, free: &[usize]) -> Option<(Vec<f64>, f64)> {
    let f = free.len();
    let s = f + 1;
    let mut a = alloc::vec![0.0; s * s];
    let mut b = alloc::vec![0.0; s];
    for (i, &fi) in free.iter().enumerate() {
        for (j, &fj) in free.iter().enumerate() {
            a[i * s + j] = q[fi * n + fj];
        }
        a[i * s + f] = 1.0;
        a[f * s + i] = 1.0;
        b[i] = c[fi];
    }
    b[f] = 1.0;
    solve_in_place(s, &mut a, &mut b)?;
    let nu = b[f];
    b.truncate(f);
    Some((b, nu))
}

fn gradient(q: &[f64], c: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            q[i * n..(i + 1) * n]
                .iter()
                .zip(v)
                .map(|(a, x)| a * x)
                .sum::<f64>()
                - c[i]
        })
        .collect()
}

pub fn infer_true_distribution(
    w: &[f64],
    m: &ConfusionMatrix,
    opts: &InferenceOptions,
) -> Result<InferenceResult> {
    let n = m.n;
    if w.len() != n {
        return Err(Error::Shape {
            context: "inference",
            expected: n,
            found: w.len(),
        });
    }
    if let Some(d) = &opts.weights {
        if d.len() != n {
            return Err(Error::Shape {
                context: "inference weights",
                expected: n,
                found: d.len(),
            });
        }
        if d.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::invalid("weights", "must be positive and finite"));
        }
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("measured", "non-finite entries"));
    }
    let (q, c) = normal_matrix(w, m, opts.weights.as_deref());
    let max_iter = if opts.max_iterations == 0 {
        10 * n + 100
    } else {
        opts.max_iterations
    };

    // Start from the clipped unconstrained solution.
    let mut v = {
        let mut a = m.data.clone();
        let mut b = w.to_vec();
        let ok = solve_in_place(n, &mut a, &mut b).is_some();
        if ok {
            b.iter_mut().for_each(|x| *x = x.max(0.0));
        }
        let s: f64 = b.iter().sum();
        if ok && s > 0.0 {
            b.iter_mut().for_each(|x| *x /= s);
            b
        } else {
            alloc::vec![1.0 / n as f64; n]
        }
    };
    let mut free: Vec<bool> = v.iter().map(|&x| x > 0.0).collect();

    let residual = |v: &[f64], nu: f64, free: &[bool]| {
        let g = gradient(&q, &c, v);
        let mut r = (v.iter().sum::<f64>() - 1.0).abs();
        for i in 0..n {
            let lam = g[i] + nu;
            r = r.max(if free[i] { lam.abs() } else { (-lam).max(0.0) });
            r = r.max((-v[i]).max(0.0));
        }
        r
    };

    let mut last_residual = f64::INFINITY;
    for iter in 1..=max_iter {
        let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
        let (x, nu) = kkt_solve(&q, &c, n, &idx).ok_or(Error::Inference {
            iterations: iter,
            residual: last_residual,
        })?;
        if x.iter().all(|&xi| xi >= 0.0) {
            for (&i, &xi) in idx.iter().zip(&x) {
                v[i] = xi;
            }
            let g = gradient(&q, &c, &v);
            let mut release: Option<(usize, f64)> = None;
            for i in 0..n {
                if free[i] {
                    continue;
                }
                let lam = g[i] + nu;
                if lam < -opts.tolerance && release.is_none_or(|(_, best)| lam < best) {
                    release = Some((i, lam));
                }
            }
            last_residual = residual(&v, nu, &free);
            match release {
                Some((i, _)) => free[i] = true,
                None => {
                    if last_residual < opts.tolerance {
                        return Ok(InferenceResult {
                            residual_norm: m
                                .apply(&v)
                                .iter()
                                .zip(w)
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum::<f64>()
                                .sqrt(),
                            kkt_residual: last_residual,
                            active_set: (0..n).filter(|&i| !free[i]).collect(),
                            iterations: iter,
                            v,
                        });
                    }
                    // Accumulated round-off; one more pass from the cleaner point.
                }
            }
        } else {
            let mut alpha = 1.0;
            let mut block = None;
            for (&i, &xi) in idx.iter().zip(&x) {
                if xi < 0.0 {
                    let a = v[i] / (v[i] - xi);
                    if a < alpha {
                        alpha = a;
                        block = Some(i);
                    }
                }
            }
            for (&i, &xi) in idx.iter().zip(&x) {
                v[i] += alpha * (xi - v[i]);
            }
            if let Some(b) = block {
                v[b] = 0.0;
                free[b] = false;
            }
            for &i in &idx {
                if v[i] <= 0.0 {
                    v[i] = 0.0;
                    free[i] = false;
                }
            }
        }
    }
    Err(Error::Inference {
        iterations: max_iter,
        residual: last_residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub n_resamples: usize,
    pub mean: Vec<f64>,
    /// Per-group standard deviation; absent with fewer than two resamples.
    pub sigma: Option<Vec<f64>>,
}

fn truncated_normal<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return mean;
    }
    for _ in 0..10_000 {
        let z: f64 = StandardNormal.sample(rng);
        let x = mean + sigma * z;
        if (0.0..0.5).contains(&x) {
            return x;
        }
    }
    mean.clamp(0.0, 0.5 - f64::EPSILON)
}

/// Multinomial resample of `n` shots from probabilities `p`.
pub fn multinomial<R: Rng + ?Sized>(n: u64, p: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = alloc::vec![0u64; p.len()];
    let mut left = n;
    let mut mass: f64 = p.iter().map(|x| x.max(0.0)).sum();
    for (o, &pi) in out.iter_mut().zip(p) {
        if left == 0 || mass <= 0.0 {
            break;
        }
        let q = (pi.max(0.0) / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).map(|b| b.sample(rng)).unwrap_or(0);
        *o = k;
        left -= k;
        mass -= pi.max(0.0);
    }
    if left > 0 {
        // Floating-point leftovers go to the last positive entry.
        if let Some(i) = p.iter().rposition(|&x| x > 0.0) {
            out[i] += left;
        }
    }
    out
}

/// Resamples (p10, p01) from truncated normals and the shots multinomially,
/// re-inferring each time. Resample r draws from stream r of `seed`.
pub fn bootstrap_uncertainty(
    measured: &[f64],
    n_shots: u64,
    grouping: Grouping,
    n_sites: usize,
    model: &DetectionModel,
    n_resamples: usize,
    seed: u64,
    opts: &InferenceOptions,
) -> Result<BootstrapResult> {
    if n_resamples == 0 {
        return Err(Error::invalid("n_resamples", "need at least one resample"));
    }
    if n_shots == 0 {
        return Err(Error::invalid("n_shots", "need at least one shot"));
    }
    model.validate()?;
    let g = grouping.n_groups(n_sites);
    if measured.len() != g {
        return Err(Error::Shape {
            context: "bootstrap",
            expected: g,
            found: measured.len(),
        });
    }
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(n_resamples);
    for r in 0..n_resamples {
        samples.push(bootstrap_draw(
            measured, n_shots, grouping, n_sites, model, seed, r as u64, opts,
        )?);
    }
    Ok(summarize(samples))
}

/// One bootstrap replicate; exposed so callers can spread replicates over
/// threads and reduce with [`summarize`].
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_draw(
    measured: &[f64],
    n_shots: u64,
    grouping: Grouping,
    n_sites: usize,
    model: &DetectionModel,
    seed: u64,
    replicate: u64,
    opts: &InferenceOptions,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    let drawn = DetectionModel {
        p10: truncated_normal(model.p10, model.sigma_p10, &mut rng),
        p01: truncated_normal(model.p01, model.sigma_p01, &mut rng),
        sigma_p10: 0.0,
        sigma_p01: 0.0,
    };
    let counts = multinomial(n_shots, measured, &mut rng);
    let w: Vec<f64> = counts.iter().map(|&c| c as f64 / n_shots as f64).collect();
    let m = confusion_matrix(grouping, n_sites, &drawn)?;
    Ok(infer_true_distribution(&w, &m, opts)?.v)
}

/// Mean and standard deviation over replicates, in replicate order.
pub fn summarize(samples: Vec<Vec<f64>>) -> BootstrapResult {
    let r = samples.len();
    let g = samples.first().map_or(0, |s| s.len());
    let mut mean = alloc::vec![0.0; g];
    for s in &samples {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= r.max(1) as f64);
    let sigma = (r >= 2).then(|| {
        let mut var = alloc::vec![0.0; g];
        for s in &samples {
            for ((v, x), m) in var.iter_mut().zip(s).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        var.into_iter()
            .map(|v| (v / (r - 1) as f64).sqrt())
            .collect()
    });
    BootstrapResult {
        n_resamples: r,
        mean,
        sigma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel_returns_input() {
        let w = [0.1, 0.2, 0.3, 0.4];
        let r = infer_true_distribution(
            &w,
            &ConfusionMatrix::identity(4),
            &InferenceOptions::default(),
        )
        .unwrap();
        for (a, b) in r.v.iter().zip(&w) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(r.active_set.is_empty());
    }

    #[test]
    fn projects_infeasible_data_onto_simplex() {
        // Euclidean projection of (0.9, 0.6, −0.2) onto the simplex is (0.65, 0.35, 0).
        let w = [0.9, 0.6, -0.2];
        let r = infer_true_distribution(
            &w,
            &ConfusionMatrix::identity(3),
            &InferenceOptions::default(),
        )
        .unwrap();
        assert!((r.v[0] - 0.65).abs() < 1e-12);
        assert!((r.v[1] - 0.35).abs() < 1e-12);
        assert_eq!(r.v[2], 0.0);
        assert_eq!(r.active_set, [2]);
    }

    #[test]
    fn single_resample_has_no_sigma() {
        let g = Grouping::ExcitationCount;
        let m = DetectionModel::default();
        let w = confusion_matrix(g, 3, &m)
            .unwrap()
            .apply(&[0.0, 0.5, 0.5, 0.0]);
        let one =
            bootstrap_uncertainty(&w, 1000, g, 3, &m, 1, 1, &InferenceOptions::default()).unwrap();
        assert!(one.sigma.is_none());
        let many =
            bootstrap_uncertainty(&w, 1000, g, 3, &m, 20, 1, &InferenceOptions::default()).unwrap();
        assert_eq!(many.sigma.unwrap().len(), 4);
    }
}
