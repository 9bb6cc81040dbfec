//! Pulse synthesis: dCRAB optimal control, reference ramps and diagnostics.

mod dcrab;
mod diagnostics;
mod fom;
pub mod nelder_mead;
mod ramps;

pub use dcrab::{optimize_dcrab, CorrectedControls, DcrabConfig, DcrabOutcome, TraceEntry};
pub use diagnostics::{eigenpopulation_trace, gate_circuit_time_estimate, GateCircuitEstimate};
pub use fom::{FigureOfMerit, FomEvaluator, SimulatedFom};
pub use nelder_mead::{minimize, Minimum, NelderMeadOptions};
pub use ramps::{
    diabaticity_rate, diabaticity_schedule, local_adiabatic_pulse, schedule_pulse, ControlPath,
    GapPolicy, RampKind, RampSpec, Schedule, StandardPath, GAP_GUARD,
};
