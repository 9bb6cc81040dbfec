//! Time evolution and instantaneous spectra.

mod evolve;
mod krylov;
mod spectrum;

pub use evolve::{
    evolve, evolve_constant, evolve_observed, evolve_under_diagonal, step_grid, EvolveOptions,
    DEFAULT_DT_US,
};
pub use krylov::{KrylovOptions, KrylovStepper};
pub use spectrum::{lowest_spectrum, SpectrumSlice, DENSE_SPECTRUM_LIMIT};
