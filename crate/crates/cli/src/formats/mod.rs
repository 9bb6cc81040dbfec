//! On-disk formats: pulse JSON, shot files, CSV tables and run manifests.

pub mod manifest;
pub mod pulse;
pub mod shots;
pub mod table;

pub use manifest::{RunManifest, Timing, MANIFEST_VERSION};
pub use pulse::PulseFile;
pub use shots::ShotsFile;
pub use table::{Cell, Table};

/// Pretty JSON with a trailing newline. Struct fields keep declaration
/// order and maps are sorted, so the output is stable.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
