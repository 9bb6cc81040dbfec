//! One module per subcommand. Each exposes a config (defaults, then TOML or a
//! previous manifest, then flags), its flag overrides and `run`.

pub mod bell_distribute;
pub mod common;
pub mod decay_scan;
pub mod evolve;
pub mod infer;
pub mod optimize;
pub mod parity_scan;
pub mod ramp_compare;
pub mod trace_eigenpop;
