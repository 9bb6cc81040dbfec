//! Reference sweeps: the linear ramp and the locally adiabatic schedule that
//! minimizes the diabaticity functional
//!
//! ```text
//! D = (ds/dt)² Σ_{n>0} |⟨E_n|∂_s H|E_0⟩|² / (E_n − E_0)²
//! ```
//!
//! at fixed total time, which gives ds/dt ∝ 1/√g(s) with g the sum above.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::{ControlBounds, DriveModel, Pulse, Waveform};
use crate::linalg::SymmetricEigen;
use crate::units::to_angular;
use crate::{Error, Result};

/// Smallest gap (rad/µs) accepted in the D sum.
pub const GAP_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampKind {
    Linear,
    LocalAdiabatic,
    OptimalControl,
}

/// What to do when E_n − E_0 drops below [`GAP_GUARD`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPolicy {
    /// Clamp the gap to the guard and record s.
    Clamp,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    pub kind: RampKind,
    pub delta0_mhz: f64,
    pub delta1_mhz: f64,
    pub omega_max_mhz: f64,
    pub total_time_us: f64,
    /// Eigenstates entering the D sum (including the ground state).
    pub eigenstates: usize,
    /// Intervals of the uniform s grid.
    pub grid: usize,
    pub gap_policy: GapPolicy,
}

impl RampSpec {
    pub fn new(kind: RampKind, total_time_us: f64) -> Self {
        RampSpec {
            kind,
            delta0_mhz: -20.0,
            delta1_mhz: 20.0,
            omega_max_mhz: 5.0,
            total_time_us,
            eigenstates: 15,
            grid: 200,
            gap_policy: GapPolicy::Clamp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time_us > 0.0) {
            return Err(Error::invalid("total_time_us", "must be positive"));
        }
        if !(self.delta0_mhz < self.delta1_mhz) {
            return Err(Error::invalid(
                "delta0_mhz",
                "sweep must increase the detuning",
            ));
        }
        if self.eigenstates < 2 || self.grid < 2 {
            return Err(Error::invalid(
                "eigenstates",
                "need at least two eigenstates and two grid intervals",
            ));
        }
        Ok(())
    }

    fn bounds(&self) -> ControlBounds {
        ControlBounds {
            omega_max_mhz: self.omega_max_mhz,
            delta_min_mhz: self.delta0_mhz.min(self.delta1_mhz),
            delta_max_mhz: self.delta0_mhz.max(self.delta1_mhz),
        }
    }

    /// The s = t/T pulse.
    pub fn linear_pulse(&self) -> Pulse {
        Pulse::linear_ramp(
            self.total_time_us,
            self.bounds(),
            self.delta0_mhz,
            self.delta1_mhz,
        )
    }
}

/// A path s ↦ (Ω(s), Δ(s)) in control space, in rad/µs, with derivatives.
pub trait ControlPath {
    fn controls(&self, s: f64) -> (f64, f64);
    fn derivatives(&self, s: f64) -> (f64, f64);
}

/// Ω(s) = Ω_max [1 − cos¹²(πs)], Δ(s) = (1 − s)Δ₀ + sΔ₁.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardPath {
    pub omega_max: f64,
    pub delta0: f64,
    pub delta1: f64,
}

impl StandardPath {
    pub fn from_spec(spec: &RampSpec) -> Self {
        StandardPath {
            omega_max: to_angular(spec.omega_max_mhz),
            delta0: to_angular(spec.delta0_mhz),
            delta1: to_angular(spec.delta1_mhz),
        }
    }
}

impl ControlPath for StandardPath {
    fn controls(&self, s: f64) -> (f64, f64) {
        let c = (PI * s).cos();
        (
            self.omega_max * (1.0 - c.powi(12)),
            (1.0 - s) * self.delta0 + s * self.delta1,
        )
    }

    fn derivatives(&self, s: f64) -> (f64, f64) {
        let (sn, c) = (PI * s).sin_cos();
        (
            self.omega_max * 12.0 * PI * c.powi(11) * sn,
            self.delta1 - self.delta0,
        )
    }
}

/// Monotone schedule s(t) on [0, T].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub total_time_us: f64,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// g(s) on the grid.
    pub rate: Vec<f64>,
    /// Grid points where the gap guard was applied.
    pub clamped: Vec<f64>,
}

impl Schedule {
    /// s at time t by linear interpolation of the tabulated inverse.
    pub fn s_at(&self, t: f64) -> f64 {
        let n = self.t.len() - 1;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.total_time_us {
            return 1.0;
        }
        let k = self.t.partition_point(|&x| x <= t).clamp(1, n);
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        if t1 <= t0 {
            return self.s[k];
        }
        self.s[k - 1] + (self.s[k] - self.s[k - 1]) * (t - t0) / (t1 - t0)
    }

    /// Copy with the total duration changed; the shape s(t/T) is unchanged.
    pub fn rescaled(&self, total_time_us: f64) -> Self {
        let f = total_time_us / self.total_time_us;
        Schedule {
            total_time_us,
            t: self.t.iter().map(|x| x * f).collect(),
            ..self.clone()
        }
    }
}

/// g(s) = Σ_{n>0} |⟨E_n|∂_sH|E_0⟩|²/(E_n − E_0)² with ∂_sH = Ω'(s) C − Δ'(s) K.
///
/// Returns the value and whether the gap guard was hit.
pub fn diabaticity_rate(
    model: &DriveModel,
    path: &dyn ControlPath,
    s: f64,
    eigenstates: usize,
    policy: GapPolicy,
) -> Result<(f64, bool)> {
    let (om, de) = path.controls(s);
    let (dom, dde) = path.derivatives(s);
    let h = model.hamiltonian(om, de);
    let n = h.dim();
    let eig = SymmetricEigen::new(n, &h.to_dense())?;
    let m = eigenstates.min(n);
    let e0 = eig.vector(0);
    // ∂_sH |E_0⟩
    let mut d = alloc::vec![0.0; n];
    model.coupling().mul_add_real(dom, &e0, &mut d);
    for ((di, k), v) in d.iter_mut().zip(model.excitations()).zip(&e0) {
        *di -= dde * k * v;
    }
    let mut g = 0.0;
    let mut hit = false;
    for k in 1..m {
        let mut gap = eig.values[k] - eig.values[0];
        if gap < GAP_GUARD {
            match policy {
                GapPolicy::Error => return Err(Error::SingularSchedule { s }),
                GapPolicy::Clamp => {
                    hit = true;
                    gap = GAP_GUARD;
                }
            }
        }
        let me: f64 = (0..n).map(|i| eig.vector_component(i, k) * d[i]).sum();
        g += me * me / (gap * gap);
    }
    Ok((g, hit))
}

/// Builds the locally adiabatic schedule: t(s) = T ∫₀ˢ √g / ∫₀¹ √g.
pub fn diabaticity_schedule(
    spec: &RampSpec,
    model: &DriveModel,
    path: &dyn ControlPath,
) -> Result<Schedule> {
    spec.validate()?;
    let n = spec.grid;
    let s: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
    let mut rate = Vec::with_capacity(n + 1);
    let mut clamped = Vec::new();
    for &sj in &s {
        let (g, hit) = diabaticity_rate(model, path, sj, spec.eigenstates, spec.gap_policy)?;
        if hit {
            clamped.push(sj);
        }
        rate.push(g);
    }
    let root: Vec<f64> = rate.iter().map(|g| g.max(0.0).sqrt()).collect();
    let mut cumulative = alloc::vec![0.0; n + 1];
    for j in 1..=n {
        cumulative[j] = cumulative[j - 1] + 0.5 * (root[j] + root[j - 1]) / n as f64;
    }
    let total = cumulative[n];
    let t = if total > 0.0 {
        cumulative
            .iter()
            .map(|c| spec.total_time_us * c / total)
            .collect()
    } else {
        s.iter().map(|x| x * spec.total_time_us).collect()
    };
    Ok(Schedule {
        total_time_us: spec.total_time_us,
        s,
        t,
        rate,
        clamped,
    })
}

/// Tabulated pulse following `path` along `schedule`, sampled on `samples`
/// uniform time intervals.
pub fn schedule_pulse(
    schedule: &Schedule,
    path: &dyn ControlPath,
    bounds: ControlBounds,
    samples: usize,
) -> Pulse {
    let samples = samples.max(2);
    let tau = schedule.total_time_us;
    let times: Vec<f64> = (0..=samples)
        .map(|j| tau * j as f64 / samples as f64)
        .collect();
    let (mut om, mut de) = (
        Vec::with_capacity(times.len()),
        Vec::with_capacity(times.len()),
    );
    for &t in &times {
        let (o, d) = path.controls(schedule.s_at(t));
        om.push(crate::units::to_mhz(o));
        de.push(crate::units::to_mhz(d));
    }
    Pulse {
        duration_us: tau,
        omega: crate::hamiltonian::Control::new(Waveform::Tabulated {
            times_us: times.clone(),
            values_mhz: om,
        }),
        delta: crate::hamiltonian::Control::new(Waveform::Tabulated {
            times_us: times,
            values_mhz: de,
        }),
        bounds,
        seed: None,
    }
}

/// The locally adiabatic pulse for a spec with the standard path.
pub fn local_adiabatic_pulse(spec: &RampSpec, model: &DriveModel) -> Result<(Pulse, Schedule)> {
    let path = StandardPath::from_spec(spec);
    let schedule = diabaticity_schedule(spec, model, &path)?;
    let samples = ((spec.total_time_us / 1e-3).round() as usize).max(spec.grid);
    let pulse = schedule_pulse(&schedule, &path, spec.bounds(), samples);
    Ok((pulse, schedule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis, ChainGeometry};
    use crate::hamiltonian::{HamiltonianTerms, LocalShifts};

    /// Constant-gap path for one atom: (Ω, Δ) = R (sin πs, −cos πs).
    struct Circle(f64);

    impl ControlPath for Circle {
        fn controls(&self, s: f64) -> (f64, f64) {
            let (sn, c) = (PI * s).sin_cos();
            (self.0 * sn, -self.0 * c)
        }
        fn derivatives(&self, s: f64) -> (f64, f64) {
            let (sn, c) = (PI * s).sin_cos();
            (self.0 * PI * c, self.0 * PI * sn)
        }
    }

    fn single_atom() -> DriveModel {
        let b = Basis::enumerate(ChainGeometry::blockaded(1)).unwrap();
        let t = HamiltonianTerms::new(&b, 24.0);
        DriveModel::new(&b, &t, &LocalShifts::zeros(1)).unwrap()
    }

    #[test]
    fn constant_gap_gives_linear_schedule() {
        let model = single_atom();
        let mut spec = RampSpec::new(RampKind::LocalAdiabatic, 2.0);
        spec.eigenstates = 2;
        let sched = diabaticity_schedule(&spec, &model, &Circle(10.0)).unwrap();
        for (s, t) in sched.s.iter().zip(&sched.t) {
            assert!((t / 2.0 - s).abs() < 1e-9, "{s} {t}");
        }
    }

    #[test]
    fn rescaling_preserves_shape() {
        let model = single_atom();
        let spec = RampSpec::new(RampKind::LocalAdiabatic, 1.0);
        let path = StandardPath::from_spec(&spec);
        let a = diabaticity_schedule(&spec, &model, &path).unwrap();
        let mut spec2 = spec.clone();
        spec2.total_time_us = 2.0;
        let b = diabaticity_schedule(&spec2, &model, &path).unwrap();
        for x in [0.1, 0.37, 0.5, 0.81] {
            assert!((a.s_at(x) - b.s_at(2.0 * x)).abs() < 1e-8);
        }
        assert!(a.t.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn error_policy_reports_s() {
        // Ω ≡ 0: the single atom's levels cross at Δ = 0, s = 1/2.
        struct Cross;
        impl ControlPath for Cross {
            fn controls(&self, s: f64) -> (f64, f64) {
                (0.0, 2.0 * s - 1.0)
            }
            fn derivatives(&self, _: f64) -> (f64, f64) {
                (0.0, 2.0)
            }
        }
        let model = single_atom();
        let mut spec = RampSpec::new(RampKind::LocalAdiabatic, 1.0);
        spec.gap_policy = GapPolicy::Error;
        spec.grid = 4;
        match diabaticity_schedule(&spec, &model, &Cross) {
            Err(Error::SingularSchedule { s }) => assert_eq!(s, 0.5),
            other => panic!("{other:?}"),
        }
        spec.gap_policy = GapPolicy::Clamp;
        assert_eq!(
            diabaticity_schedule(&spec, &model, &Cross).unwrap().clamped,
            alloc::vec![0.5]
        );
    }
}
