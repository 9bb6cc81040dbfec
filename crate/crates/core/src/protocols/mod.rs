//! Measurement protocols on simulated states.

mod bell;
mod correlations;
mod dimer;
mod ghz;
mod parity;
mod readout;

pub use bell::{
    bell_distribution_protocol, edge_reduced, forward_state, psi_plus, reverse_guess,
    reverse_sweep_fom, BellConfig, BellReport, REVERSE_DURATION_US, REVERSE_END_MHZ,
};
pub use correlations::{g2_from_shots, g2_from_state, Correlations};
pub use dimer::{dimer_model_contrast, DimerContrast, MAX_DIMERS};
pub use ghz::{
    direct_ghz_fidelity, exact_ghz_decomposition, fidelity_lower_bound, DensityMatrix,
    GhzDecomposition,
};
pub use parity::{
    coherence_lower_bound, default_scan_times, density_parity_scan, fit_fixed_frequency,
    fit_free_frequency, parity_oscillation_scan, CoherenceBound, ParityFit, ParityScan,
};
pub use readout::{
    apply_single_site, apply_ux, ghz_contrast, optimal_ux_duration, parity_expectation,
    product_gate_matrix, rotation, Readout, ReadoutSpec,
};
