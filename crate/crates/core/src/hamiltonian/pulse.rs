//! Control pulses: an analytic or tabulated guess plus a windowed,
//! randomized-frequency Fourier correction, clamped to hardware bounds.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::units::to_angular;
use crate::{Error, Result};

/// Guess waveform of one control, in MHz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Waveform {
    Constant {
        value_mhz: f64,
    },
    /// `max [1 − cos^power(π t/τ)]`.
    CosinePower {
        max_mhz: f64,
        power: u32,
    },
    /// Linear sweep from `start` at t = 0 to `end` at t = τ.
    Linear {
        start_mhz: f64,
        end_mhz: f64,
    },
    /// Piecewise-linear table; held constant beyond its ends.
    Tabulated {
        times_us: Vec<f64>,
        values_mhz: Vec<f64>,
    },
}

impl Waveform {
    pub fn value(&self, t: f64, duration: f64) -> f64 {
        match self {
            Waveform::Constant { value_mhz } => *value_mhz,
            Waveform::CosinePower { max_mhz, power } => {
                let c = (PI * t / duration).cos();
                max_mhz * (1.0 - c.powi(*power as i32))
            }
            Waveform::Linear { start_mhz, end_mhz } => {
                let s = if duration > 0.0 { t / duration } else { 0.0 };
                (1.0 - s) * start_mhz + s * end_mhz
            }
            Waveform::Tabulated {
                times_us,
                values_mhz,
            } => interpolate(times_us, values_mhz, t),
        }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if let Waveform::Tabulated {
            times_us,
            values_mhz,
        } = self
        {
            if times_us.is_empty() || times_us.len() != values_mhz.len() {
                return Err(Error::invalid(
                    name,
                    "tabulated waveform needs matching, non-empty arrays",
                ));
            }
            if times_us.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid(
                    name,
                    "tabulated times must be strictly increasing",
                ));
            }
        }
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] * (1.0 - w) + ys[k] * w
}

/// One Fourier component of a correction: frequency ω = 2π(k + r)/τ and
/// coefficients A (sine) and B (cosine) in MHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrabTerm {
    pub k: u32,
    pub r: f64,
    pub a_mhz: f64,
    pub b_mhz: f64,
}

impl CrabTerm {
    #[inline]
    pub fn angular_frequency(&self, duration: f64) -> f64 {
        TAU * (self.k as f64 + self.r) / duration
    }
}

/// Window that pins the corrected control to its guess at both ends.
#[inline]
pub fn window(t: f64, duration: f64) -> f64 {
    let s = (PI * t / duration).sin();
    s * s
}

/// Guess plus correction for a single control.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub guess: Waveform,
    #[serde(default)]
    pub correction: Vec<CrabTerm>,
}

impl Control {
    pub fn new(guess: Waveform) -> Self {
        Control {
            guess,
            correction: Vec::new(),
        }
    }

    /// Unclamped value in MHz.
    pub fn raw_value(&self, t: f64, duration: f64) -> f64 {
        let mut f = 0.0;
        for term in &self.correction {
            let w = term.angular_frequency(duration);
            let (s, c) = (w * t).sin_cos();
            f += term.a_mhz * s + term.b_mhz * c;
        }
        self.guess.value(t, duration) + window(t, duration) * f
    }
}

/// Amplitude and detuning bounds (MHz) enforced by clamping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlBounds {
    pub omega_max_mhz: f64,
    pub delta_min_mhz: f64,
    pub delta_max_mhz: f64,
}

impl Default for ControlBounds {
    fn default() -> Self {
        ControlBounds {
            omega_max_mhz: 5.0,
            delta_min_mhz: -20.0,
            delta_max_mhz: 20.0,
        }
    }
}

/// A complete two-control pulse Ω(t), Δ(t) on [0, τ].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub duration_us: f64,
    pub omega: Control,
    pub delta: Control,
    pub bounds: ControlBounds,
    /// Seed of the generator that drew the randomized frequency offsets.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Pulse {
    /// Ω_max[1 − cos¹²(πt/τ)] with a linear detuning sweep.
    pub fn linear_ramp(
        duration_us: f64,
        bounds: ControlBounds,
        delta_start_mhz: f64,
        delta_end_mhz: f64,
    ) -> Self {
        Pulse {
            duration_us,
            omega: Control::new(Waveform::CosinePower {
                max_mhz: bounds.omega_max_mhz,
                power: 12,
            }),
            delta: Control::new(Waveform::Linear {
                start_mhz: delta_start_mhz,
                end_mhz: delta_end_mhz,
            }),
            bounds,
            seed: None,
        }
    }

    pub fn constant(duration_us: f64, omega_mhz: f64, delta_mhz: f64) -> Self {
        let bounds = ControlBounds {
            omega_max_mhz: omega_mhz.max(0.0),
            delta_min_mhz: delta_mhz.min(0.0),
            delta_max_mhz: delta_mhz.max(0.0),
        };
        Pulse {
            duration_us,
            omega: Control::new(Waveform::Constant {
                value_mhz: omega_mhz,
            }),
            delta: Control::new(Waveform::Constant {
                value_mhz: delta_mhz,
            }),
            bounds,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_us >= 0.0) || !self.duration_us.is_finite() {
            return Err(Error::invalid(
                "duration_us",
                "must be finite and non-negative",
            ));
        }
        let b = &self.bounds;
        if !(b.omega_max_mhz >= 0.0) || !(b.delta_min_mhz <= b.delta_max_mhz) {
            return Err(Error::invalid(
                "bounds",
                "need omega_max >= 0 and delta_min <= delta_max",
            ));
        }
        self.omega.guess.validate("omega.guess")?;
        self.delta.guess.validate("delta.guess")?;
        Ok(())
    }

    /// Clamped controls at time `t`, in MHz.
    pub fn controls_mhz(&self, t: f64) -> Result<(f64, f64)> {
        let tau = self.duration_us;
        let slack = 1e-12 * tau.max(1.0);
        if !(t >= -slack && t <= tau + slack) {
            return Err(Error::Domain { t, duration: tau });
        }
        let t = t.clamp(0.0, tau);
        if tau == 0.0 {
            let om = self.omega.guess.value(0.0, 0.0);
            let de = self.delta.guess.value(0.0, 0.0);
            return Ok(self.clamp(om, de));
        }
        Ok(self.clamp(self.omega.raw_value(t, tau), self.delta.raw_value(t, tau)))
    }

    fn clamp(&self, omega: f64, delta: f64) -> (f64, f64) {
        let b = &self.bounds;
        (
            omega.clamp(0.0, b.omega_max_mhz),
            delta.clamp(b.delta_min_mhz, b.delta_max_mhz),
        )
    }

    /// Clamped controls at time `t` as angular frequencies (rad/µs).
    pub fn sample_controls(&self, t: f64) -> Result<(f64, f64)> {
        let (om, de) = self.controls_mhz(t)?;
        Ok((to_angular(om), to_angular(de)))
    }

    /// Copy with one extra correction term on each selected control.
    pub fn dressed(&self, omega_term: Option<CrabTerm>, delta_term: Option<CrabTerm>) -> Self {
        let mut p = self.clone();
        if let Some(t) = omega_term {
            p.omega.correction.push(t);
        }
        if let Some(t) = delta_term {
            p.delta.correction.push(t);
        }
        p
    }

    /// Samples both controls (MHz) on `n + 1` evenly spaced times.
    pub fn tabulate(&self, n: usize) -> Result<Vec<(f64, f64, f64)>> {
        let n = n.max(1);
        (0..=n)
            .map(|j| {
                let t = self.duration_us * j as f64 / n as f64;
                self.controls_mhz(t).map(|(o, d)| (t, o, d))
            })
            .collect()
    }
}
