//! Numerical core for preparing, probing and verifying GHZ states on
//! one-dimensional Rydberg atom chains.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command line and any thread pools live in the companion `rydberg-ghz`
//! crate.
//!
//! Module map:
//!
//! * [`basis`]: blockade-truncated configuration space and per-configuration observables.
//! * [`hamiltonian`]: sparse many-body Hamiltonian, local light shifts and control pulses.
//! * [`propagator`]: Krylov time stepping and low-lying instantaneous spectra.
//! * [`control`]: dCRAB optimal control, adiabatic reference ramps, gate-circuit estimate.
//! * [`protocols`]: GHZ fidelity, parity oscillations, coherence bound, dimer model,
//!   correlations and entanglement distribution.
//! * [`detection`]: detection-error channel, confusion matrices and simplex-constrained inference.
//! * [`noise`]: quenched-disorder Monte Carlo for dephasing and decay.
#![no_std]
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]
// When any dependency links std, its inherent f64 methods shadow `Float`
// and the import looks unused.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod control;
pub mod detection;
mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod noise;
pub mod propagator;
pub mod protocols;
pub mod state;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
