use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, Config};
use crate::{Error, Result};

/// Independent per-site misidentification probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    /// P(read 1 | true 0).
    pub p10: f64,
    /// P(read 0 | true 1).
    pub p01: f64,
    /// Standard uncertainty of `p10`, used by the bootstrap.
    pub sigma_p10: f64,
    pub sigma_p01: f64,
}

impl Default for DetectionModel {
    fn default() -> Self {
        DetectionModel {
            p10: 0.0063,
            p01: 0.0227,
            sigma_p10: 0.0001,
            sigma_p01: 0.0042,
        }
    }
}

impl DetectionModel {
    pub fn new(p10: f64, p01: f64) -> Result<Self> {
        let m = DetectionModel {
            p10,
            p01,
            sigma_p10: 0.0,
            sigma_p01: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    /// Perfect detection.
    pub fn ideal() -> Self {
        DetectionModel {
            p10: 0.0,
            p01: 0.0,
            sigma_p10: 0.0,
            sigma_p01: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p10", self.p10), ("p01", self.p01)] {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::invalid(
                    name,
                    "error probabilities must lie in [0, 1/2)",
                ));
            }
        }
        for (name, s) in [("sigma_p10", self.sigma_p10), ("sigma_p01", self.sigma_p01)] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::invalid(
                    name,
                    "uncertainty must be finite and non-negative",
                ));
            }
        }
        Ok(())
    }

    /// Probability that a configuration with `zeros` unexcited and `ones`
    /// excited sites is read back unchanged.
    pub fn transmission(&self, zeros: u32, ones: u32) -> f64 {
        (1.0 - self.p10).powi(zeros as i32) * (1.0 - self.p01).powi(ones as i32)
    }

    /// Applies the channel to one configuration.
    pub fn corrupt<R: Rng + ?Sized>(&self, n_sites: usize, config: Config, rng: &mut R) -> Config {
        let mut out = config;
        for bit in 0..n_sites {
            let mask = 1u64 << bit;
            let p = if config & mask != 0 {
                self.p01
            } else {
                self.p10
            };
            if p > 0.0 && rng.random::<f64>() < p {
                out ^= mask;
            }
        }
        out
    }
}

/// Detected bitstrings of one experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotSet {
    pub n_sites: usize,
    pub shots: Vec<Config>,
    pub seed: Option<u64>,
}

impl ShotSet {
    pub fn new(n_sites: usize, shots: Vec<Config>) -> Result<Self> {
        if n_sites == 0 || n_sites > crate::basis::MAX_SITES {
            return Err(Error::invalid("n_sites", "out of range"));
        }
        let limit = if n_sites == 64 {
            !0
        } else {
            (1u64 << n_sites) - 1
        };
        if shots.iter().any(|&s| s > limit) {
            return Err(Error::invalid("shots", "bitstring wider than the chain"));
        }
        Ok(ShotSet {
            n_sites,
            shots,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    /// Fraction of shots equal to `config`.
    pub fn frequency(&self, config: Config) -> f64 {
        if self.shots.is_empty() {
            return 0.0;
        }
        self.shots.iter().filter(|&&s| s == config).count() as f64 / self.shots.len() as f64
    }
}

/// Draws `n_shots` configurations from |ψ|² over `basis` and passes each
/// through the detection channel.
pub fn sample_shots(
    basis: &Basis,
    psi: &[Complex64],
    n_shots: usize,
    model: &DetectionModel,
    seed: u64,
) -> Result<ShotSet> {
    if psi.len() != basis.len() {
        return Err(Error::Shape {
            context: "shot sampling",
            expected: basis.len(),
            found: psi.len(),
        });
    }
    if n_shots == 0 {
        return Err(Error::invalid("n_shots", "need at least one shot"));
    }
    model.validate()?;
    let mut cdf = Vec::with_capacity(psi.len());
    let mut acc = 0.0;
    for a in psi {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::invalid("psi", "state has zero norm"));
    }
    let n = basis.n_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shots = (0..n_shots)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(psi.len() - 1);
            model.corrupt(n, basis.config(idx), &mut rng)
        })
        .collect();
    Ok(ShotSet {
        n_sites: n,
        shots,
        seed: Some(seed),
    })
}
