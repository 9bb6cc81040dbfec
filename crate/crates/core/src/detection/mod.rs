//! Detection errors: the forward channel on bitstrings, its action on
//! outcome groups and the constrained inversion back to true populations.

mod channel;
mod grouping;
mod inference;

pub use channel::{sample_shots, DetectionModel, ShotSet};
pub use grouping::{confusion_matrix, ConfusionMatrix, GroupLabel, Grouping};
pub use inference::{
    bootstrap_draw, bootstrap_uncertainty, infer_true_distribution, multinomial, summarize,
    BootstrapResult, GroupedDistribution, InferenceOptions, InferenceResult,
};
