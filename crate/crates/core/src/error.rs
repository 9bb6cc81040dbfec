use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised anywhere in the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid chain geometry: {0}")]
    Geometry(String),

    #[error("basis would contain {size} configurations, above the capacity limit of {limit}")]
    Capacity { size: u64, limit: u64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("time {t} µs lies outside the pulse window [0, {duration}] µs")]
    Domain { t: f64, duration: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Krylov propagation did not converge at step {step} (error estimate {estimate:e})")]
    Propagation { step: usize, estimate: f64 },

    #[error("eigensolver failed: {0}")]
    Spectral(String),

    #[error("instantaneous gap vanishes at s = {s}")]
    SingularSchedule { s: f64 },

    #[error("fit failed: {reason}")]
    Fit {
        reason: String,
        /// Data the fit was attempted on, as (x, y) pairs.
        curve: Vec<(f64, f64)>,
    },

    #[error("constrained inference did not converge after {iterations} iterations (KKT residual {residual:e})")]
    Inference { iterations: usize, residual: f64 },

    #[error("figure-of-merit evaluation failed in super-iteration {iteration}: {source}")]
    Optimization {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn fit(reason: impl Into<String>, curve: Vec<(f64, f64)>) -> Self {
        Error::Fit {
            reason: reason.into(),
            curve,
        }
    }
}
