//! Frequency conventions.
//!
//! User-facing frequencies are ordinary frequencies ν in MHz (the usual
//! "/2π" reporting style). Internally every rate is angular, ω = 2πν in
//! rad/µs, with time in µs and ħ = 1.

use core::f64::consts::TAU;
use serde::{Deserialize, Serialize};

/// An ordinary frequency in MHz.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mhz(pub f64);

impl Mhz {
    /// Angular frequency in rad/µs.
    #[inline]
    pub fn angular(self) -> f64 {
        TAU * self.0
    }

    #[inline]
    pub fn from_angular(omega: f64) -> Self {
        Mhz(omega / TAU)
    }
}

#[inline]
pub fn to_angular(mhz: f64) -> f64 {
    TAU * mhz
}

#[inline]
pub fn to_mhz(angular: f64) -> f64 {
    angular / TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact_to_1e12() {
        for &v in &[0.0, 1e-6, 0.043, 3.8, 5.0, 24.0, -20.0, 1234.5678] {
            let back = Mhz::from_angular(Mhz(v).angular()).0;
            let scale = if v == 0.0 { 1.0 } else { v.abs() };
            assert!((back - v).abs() / scale < 1e-12, "{v} -> {back}");
        }
    }

    #[test]
    fn interaction_scale() {
        assert!((Mhz(24.0).angular() - 150.796_447_372_310_08).abs() < 1e-10);
    }
}
