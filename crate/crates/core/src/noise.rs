//! Quenched-disorder Monte Carlo: static Doppler detunings, bond-by-bond
//! interaction disorder from position spread, and Rydberg decay / photon
//! scattering as a survival weight.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::{symmetry_sector, Basis, ChainGeometry, Sector};
use crate::hamiltonian::{interaction_energy, DriveModel, HamiltonianTerms, LocalShifts, Pulse};
use crate::propagator::{evolve_observed, EvolveOptions};
use crate::protocols::{exact_ghz_decomposition, GhzDecomposition};
use crate::units::to_angular;
use crate::{Error, Result};

/// Bond multipliers are clamped to this range.
pub const BOND_FACTOR_RANGE: (f64, f64) = (0.5, 2.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Per-site static detuning spread, MHz.
    pub doppler_sigma_mhz: f64,
    /// Log-normal spread of nearest-neighbour interaction factors.
    pub position_sigma: f64,
    /// Off-resonant scattering time, µs; absent disables it.
    pub scattering_time_us: Option<f64>,
    /// Rydberg-state lifetime, µs; absent disables it.
    pub rydberg_lifetime_us: Option<f64>,
    pub n_realizations: usize,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            doppler_sigma_mhz: 0.043,
            position_sigma: 0.05,
            scattering_time_us: Some(75.0),
            rydberg_lifetime_us: Some(150.0),
            n_realizations: 1000,
            seed: 0,
        }
    }
}

impl NoiseModel {
    /// Doppler dephasing only, with infinite lifetimes.
    pub fn doppler_only(sigma_mhz: f64) -> Self {
        NoiseModel {
            doppler_sigma_mhz: sigma_mhz,
            position_sigma: 0.0,
            scattering_time_us: None,
            rydberg_lifetime_us: None,
            ..NoiseModel::default()
        }
    }

    pub fn noiseless() -> Self {
        Self::doppler_only(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [
            ("doppler_sigma_mhz", self.doppler_sigma_mhz),
            ("position_sigma", self.position_sigma),
        ] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::invalid(name, "must be finite and non-negative"));
            }
        }
        for (name, t) in [
            ("scattering_time_us", self.scattering_time_us),
            ("rydberg_lifetime_us", self.rydberg_lifetime_us),
        ] {
            if let Some(t) = t {
                if !(t > 0.0) {
                    return Err(Error::invalid(name, "must be positive"));
                }
            }
        }
        if self.n_realizations == 0 {
            return Err(Error::invalid(
                "n_realizations",
                "need at least one realization",
            ));
        }
        Ok(())
    }

    /// Decay rate (1/µs) of the survival weight at mean excitation `excited`
    /// in a chain of `n_sites`.
    pub fn decay_rate(&self, n_sites: usize, excited: f64) -> f64 {
        self.rydberg_lifetime_us.map_or(0.0, |t| excited / t)
            + self
                .scattering_time_us
                .map_or(0.0, |t| n_sites as f64 / (2.0 * t))
    }

    /// exp(−t·rate) for a hold of `t_us` at fixed mean excitation.
    pub fn survival(&self, n_sites: usize, excited: f64, t_us: f64) -> f64 {
        (-t_us * self.decay_rate(n_sites, excited)).exp()
    }
}

/// One frozen disorder draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    /// Additional local detuning per site, MHz.
    pub detuning_mhz: Vec<f64>,
    /// Factor per bond (i, i+1).
    pub bond_multipliers: Vec<f64>,
}

/// Realization `k`: stream `k` of a ChaCha8 generator seeded by the model.
pub fn disorder_realization(
    model: &NoiseModel,
    geometry: &ChainGeometry,
    k: u64,
) -> DisorderRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(k);
    let n = geometry.n_sites;
    let detuning_mhz = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            model.doppler_sigma_mhz * z
        })
        .collect();
    let bond_multipliers = (0..n.saturating_sub(1))
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            (model.position_sigma * z)
                .exp()
                .clamp(BOND_FACTOR_RANGE.0, BOND_FACTOR_RANGE.1)
        })
        .collect();
    DisorderRealization {
        detuning_mhz,
        bond_multipliers,
    }
}

/// Hold energy of one configuration under a realization, rad/µs.
fn hold_energy(geometry: &ChainGeometry, v_mhz: f64, r: &DisorderRealization, config: u64) -> f64 {
    let shift: f64 = (1..=geometry.n_sites)
        .filter(|&i| geometry.occupation(config, i) == 1)
        .map(|i| r.detuning_mhz[i - 1])
        .sum();
    interaction_energy(geometry, v_mhz, Some(&r.bond_multipliers), config) - to_angular(shift)
}

/// A state after a hold of `t_us` with Ω = Δ = 0: each configuration picks up
/// its own disorder-shifted phase.
pub fn hold_state(
    basis: &Basis,
    psi: &[Complex64],
    v_mhz: f64,
    r: &DisorderRealization,
    t_us: f64,
) -> Result<Vec<Complex64>> {
    if psi.len() != basis.len() {
        return Err(Error::Shape {
            context: "hold state",
            expected: basis.len(),
            found: psi.len(),
        });
    }
    let g = basis.geometry();
    Ok(basis
        .configs()
        .iter()
        .zip(psi)
        .map(|(&c, a)| a * Complex64::from_polar(1.0, -hold_energy(g, v_mhz, r, c) * t_us))
        .collect())
}

/// Two-parameter fit y = a·f(x/b).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub timescale_us: f64,
    pub rms_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceDecay {
    pub times_us: Vec<f64>,
    /// |⟨β(t)⟩| over realizations, times the survival weight.
    pub mean_abs_beta: Vec<f64>,
    pub stderr: Vec<f64>,
    pub survival: Vec<f64>,
    /// |β(0)| e^{−(t/T)²}.
    pub gaussian: DecayFit,
    /// |β(0)| e^{−t/τ}.
    pub exponential: DecayFit,
}

/// Closed form for independent static detunings of spread σ:
/// ⟨e^{iΣ±2πδ_i t}⟩ = exp(−(2πσt)² N/2).
pub fn doppler_coherence_oracle(sigma_mhz: f64, n_sites: usize, t_us: f64) -> f64 {
    let x = to_angular(sigma_mhz) * t_us;
    (-0.5 * x * x * n_sites as f64).exp()
}

/// Gaussian timescale of [`doppler_coherence_oracle`]: √2/(2πσ√N).
pub fn doppler_coherence_time(sigma_mhz: f64, n_sites: usize) -> f64 {
    core::f64::consts::SQRT_2 / (to_angular(sigma_mhz) * (n_sites as f64).sqrt())
}

/// Averages the GHZ coherence β = ψ_A ψ̄_Ā over disorder during a hold.
pub fn decohered_ghz_coherence(
    basis: &Basis,
    psi: &[Complex64],
    v_mhz: f64,
    model: &NoiseModel,
    delays_us: &[f64],
) -> Result<CoherenceDecay> {
    model.validate()?;
    if delays_us.is_empty() || delays_us.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("delays_us", "need non-negative delays"));
    }
    let decomposition = exact_ghz_decomposition(basis, psi)?;
    let g = basis.geometry();
    let (ia, iabar) = basis.ghz_components()?;
    let (ca, cabar) = (basis.config(ia), basis.config(iabar));
    let beta0 = decomposition.beta();
    let excited = basis.excitations(ia) as f64 * decomposition.p_a
        + basis.excitations(iabar) as f64 * decomposition.p_abar;
    let excited = excited / (decomposition.p_a + decomposition.p_abar).max(f64::MIN_POSITIVE);

    let nt = delays_us.len();
    let mut sum = alloc::vec![Complex64::new(0.0, 0.0); nt];
    let mut sum_sq = alloc::vec![0.0; nt];
    let splittings: Vec<f64> = (0..model.n_realizations as u64)
        .map(|k| {
            let r = disorder_realization(model, g, k);
            hold_energy(g, v_mhz, &r, ca) - hold_energy(g, v_mhz, &r, cabar)
        })
        .collect();
    for (j, &t) in delays_us.iter().enumerate() {
        for &w in &splittings {
            let b = beta0 * Complex64::from_polar(1.0, -w * t);
            sum[j] += b;
            sum_sq[j] += b.norm_sqr();
        }
    }
    let n = model.n_realizations as f64;
    let survival: Vec<f64> = delays_us
        .iter()
        .map(|&t| model.survival(basis.n_sites(), excited, t))
        .collect();
    let mut mean_abs_beta = Vec::with_capacity(nt);
    let mut stderr = Vec::with_capacity(nt);
    for j in 0..nt {
        let mean = sum[j] / n;
        let var = if model.n_realizations > 1 {
            ((sum_sq[j] / n - mean.norm_sqr()) * n / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        mean_abs_beta.push(mean.norm() * survival[j]);
        stderr.push((var / n).sqrt() * survival[j]);
    }
    let gaussian = fit_decay(delays_us, &mean_abs_beta, DecayShape::Gaussian)?;
    let exponential = fit_decay(delays_us, &mean_abs_beta, DecayShape::Exponential)?;
    Ok(CoherenceDecay {
        times_us: delays_us.to_vec(),
        mean_abs_beta,
        stderr,
        survival,
        gaussian,
        exponential,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayShape {
    Gaussian,
    Exponential,
}

impl DecayShape {
    fn eval(self, a: f64, tau: f64, t: f64) -> f64 {
        let x = t / tau;
        match self {
            DecayShape::Gaussian => a * (-x * x).exp(),
            DecayShape::Exponential => a * (-x).exp(),
        }
    }
}

/// Levenberg-Marquardt fit of amplitude and timescale. A flat curve reports
/// an infinite timescale.
pub fn fit_decay(t: &[f64], y: &[f64], shape: DecayShape) -> Result<DecayFit> {
    let curve = || t.iter().copied().zip(y.iter().copied()).collect::<Vec<_>>();
    if t.len() != y.len() || t.len() < 2 {
        return Err(Error::fit("need at least two matching points", curve()));
    }
    if y.iter().chain(t).any(|v| !v.is_finite()) {
        return Err(Error::fit("non-finite data", curve()));
    }
    let a0 = y.iter().fold(0.0f64, |m, v| m.max(*v));
    if !(a0 > 0.0) {
        return Err(Error::fit("curve has no positive values", curve()));
    }
    let t_max = t.iter().fold(0.0f64, |m, v| m.max(*v));
    let spread = y.iter().fold(0.0f64, |m, v| m.max((v - y[0]).abs()));
    if spread <= 1e-12 * a0 || t_max == 0.0 {
        return Ok(DecayFit {
            amplitude: y.iter().sum::<f64>() / y.len() as f64,
            timescale_us: f64::INFINITY,
            rms_residual: rms(t, y, |_| y.iter().sum::<f64>() / y.len() as f64),
        });
    }
    // Fit in log-timescale so the timescale stays positive.
    let guess = t
        .iter()
        .zip(y)
        .find(|(_, v)| **v < a0 / core::f64::consts::E)
        .map_or(t_max, |(tt, _)| tt.max(t_max * 1e-3));
    let mut p = [a0, guess.ln()];
    let model = |p: &[f64; 2], tt: f64| shape.eval(p[0], p[1].exp(), tt);
    let cost = |p: &[f64; 2]| {
        t.iter()
            .zip(y)
            .map(|(&tt, &v)| (v - model(p, tt)).powi(2))
            .sum::<f64>()
    };
    let mut c = cost(&p);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = [0.0; 4];
        let mut jtr = [0.0; 2];
        for (&tt, &v) in t.iter().zip(y) {
            let x = tt / p[1].exp();
            let (f, da, dl) = match shape {
                DecayShape::Gaussian => {
                    let e = (-x * x).exp();
                    (p[0] * e, e, p[0] * e * 2.0 * x * x)
                }
                DecayShape::Exponential => {
                    let e = (-x).exp();
                    (p[0] * e, e, p[0] * e * x)
                }
            };
            let r = v - f;
            let jr = [da, dl];
            for i in 0..2 {
                jtr[i] += jr[i] * r;
                for k in 0..2 {
                    jtj[i * 2 + k] += jr[i] * jr[k];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let a = [
                jtj[0] * (1.0 + lambda),
                jtj[1],
                jtj[2],
                jtj[3] * (1.0 + lambda),
            ];
            let det = a[0] * a[3] - a[1] * a[2];
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step = [
                (a[3] * jtr[0] - a[1] * jtr[1]) / det,
                (a[0] * jtr[1] - a[2] * jtr[0]) / det,
            ];
            let trial = [p[0] + step[0], p[1] + step[1]];
            let ct = cost(&trial);
            if ct.is_finite() && ct <= c {
                let rel = (c - ct) / c.max(f64::MIN_POSITIVE);
                p = trial;
                c = ct;
                lambda = (lambda * 0.3).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !p[0].is_finite() || !p[1].is_finite() {
        return Err(Error::fit("diverged", curve()));
    }
    Ok(DecayFit {
        amplitude: p[0],
        timescale_us: p[1].exp(),
        rms_residual: (c / t.len() as f64).sqrt(),
    })
}

fn rms(t: &[f64], y: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    (t.iter()
        .zip(y)
        .map(|(&tt, &v)| (v - f(tt)).powi(2))
        .sum::<f64>()
        / t.len() as f64)
        .sqrt()
}

/// Outcome of one noisy preparation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisySample {
    pub decomposition: GhzDecomposition,
    /// exp(−∫ rate dt) along the trajectory.
    pub survival: f64,
    /// survival × fidelity.
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyPreparation {
    pub samples: Vec<NoisySample>,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub stderr_fidelity: f64,
}

/// Prepares from |0…0⟩ under realization `k`. A realization with no
/// disorder keeps the reflection symmetry and runs in the even sector.
pub fn noisy_realization(
    basis: &Basis,
    v_mhz: f64,
    shifts: &LocalShifts,
    pulse: &Pulse,
    model: &NoiseModel,
    k: u64,
    opts: &EvolveOptions,
) -> Result<NoisySample> {
    let g = basis.geometry();
    let r = disorder_realization(model, g, k);
    let terms = HamiltonianTerms::with_bond_multipliers(basis, v_mhz, &r.bond_multipliers)?;
    let total = shifts.add(&LocalShifts::from_mhz(r.detuning_mhz.clone()))?;
    let symmetric = total.is_reflection_symmetric(1e-12) && {
        let m = &r.bond_multipliers;
        (0..m.len()).all(|i| m[i] == m[m.len() - 1 - i])
    };
    let model_h = if symmetric {
        DriveModel::in_sector(basis, &terms, &total, symmetry_sector(basis, Sector::Even))?
    } else {
        DriveModel::new(basis, &terms, &total)?
    };
    let psi0 = model_h.from_parent(&crate::state::StateVector::ground(basis).amplitudes)?;
    let n = basis.n_sites();
    let excitations = model_h.excitations().to_vec();
    let mut integral = 0.0;
    let mut last: Option<(f64, f64)> = None;
    let out = evolve_observed(&model_h, pulse, &psi0, opts, |_, t, psi| {
        let kexp: f64 = psi
            .iter()
            .zip(&excitations)
            .map(|(a, k)| a.norm_sqr() * k)
            .sum();
        let rate = model.decay_rate(n, kexp);
        if let Some((t0, r0)) = last {
            integral += 0.5 * (t - t0) * (rate + r0);
        }
        last = Some((t, rate));
    })?;
    let decomposition = exact_ghz_decomposition(basis, &model_h.to_parent(&out)?)?;
    let survival = (-integral).exp();
    Ok(NoisySample {
        fidelity: decomposition.fidelity * survival,
        decomposition,
        survival,
    })
}

/// Mean, spread and standard error, in sample order.
pub fn aggregate(samples: Vec<NoisySample>) -> NoisyPreparation {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.fidelity).sum::<f64>() / n.max(1.0);
    let var = if samples.len() > 1 {
        samples
            .iter()
            .map(|s| (s.fidelity - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    NoisyPreparation {
        samples,
        mean_fidelity: mean,
        std_fidelity: var.sqrt(),
        stderr_fidelity: (var / n.max(1.0)).sqrt(),
    }
}

pub fn noisy_preparation(
    basis: &Basis,
    v_mhz: f64,
    shifts: &LocalShifts,
    pulse: &Pulse,
    model: &NoiseModel,
    opts: &EvolveOptions,
) -> Result<NoisyPreparation> {
    model.validate()?;
    let samples = (0..model.n_realizations as u64)
        .map(|k| noisy_realization(basis, v_mhz, shifts, pulse, model, k, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(samples))
}
