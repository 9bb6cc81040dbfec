use std::path::{Path, PathBuf};

use rydberg_ghz_core::basis::{symmetry_sector, Basis, ChainGeometry, Sector, MAX_SITES};
use rydberg_ghz_core::hamiltonian::{DriveModel, HamiltonianTerms, LocalShifts, Pulse};
use rydberg_ghz_core::propagator::{evolve, EvolveOptions};
use rydberg_ghz_core::protocols::GhzDecomposition;
use rydberg_ghz_core::state::StateVector;
use serde::Serialize;

use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::formats::PulseFile;

pub const IDEAL_GHZ: &str = "ideal-ghz";

pub fn check_chain(n_sites: usize, field: &str) -> CliResult<()> {
    if !(2..=MAX_SITES.min(24)).contains(&n_sites) {
        return Err(CliError::field(
            field,
            format!("chain length {n_sites} outside 2..=24"),
        ));
    }
    Ok(())
}

/// GHZ targets need an even chain.
pub fn check_even(n_sites: usize, field: &str) -> CliResult<()> {
    check_chain(n_sites, field)?;
    if n_sites % 2 != 0 {
        return Err(CliError::field(
            field,
            format!("a GHZ target needs an even chain, got {n_sites}"),
        ));
    }
    Ok(())
}

pub fn check_positive(x: f64, field: &str) -> CliResult<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(CliError::field(field, format!("must be positive, got {x}")));
    }
    Ok(())
}

pub fn blockaded(n_sites: usize) -> CliResult<Basis> {
    Ok(Basis::enumerate(ChainGeometry::blockaded(n_sites))?)
}

pub fn shifts(n_sites: usize, edge_shifts: bool) -> LocalShifts {
    if edge_shifts {
        LocalShifts::preparation(n_sites)
    } else {
        LocalShifts::zeros(n_sites)
    }
}

/// Drive model for preparation from |0…0⟩: the even reflection sector, which
/// the ground state and every symmetric control leave invariant.
pub fn preparation_model(basis: &Basis, v_mhz: f64, edge_shifts: bool) -> CliResult<DriveModel> {
    let terms = HamiltonianTerms::new(basis, v_mhz);
    let s = shifts(basis.n_sites(), edge_shifts);
    Ok(DriveModel::in_sector(
        basis,
        &terms,
        &s,
        symmetry_sector(basis, Sector::Even),
    )?)
}

pub fn options(dt_us: f64) -> CliResult<EvolveOptions> {
    check_positive(dt_us, "dt_us")?;
    Ok(EvolveOptions {
        dt_us,
        ..EvolveOptions::default()
    })
}

/// State after `pulse` from |0…0⟩, over the blockaded basis.
pub fn prepare_state(
    basis: &Basis,
    v_mhz: f64,
    edge_shifts: bool,
    pulse: &Pulse,
    opts: &EvolveOptions,
) -> CliResult<StateVector> {
    let model = preparation_model(basis, v_mhz, edge_shifts)?;
    let psi0 = model.from_parent(&StateVector::ground(basis).amplitudes)?;
    let out = evolve(&model, pulse, &psi0, opts)?;
    Ok(StateVector::from_amplitudes(model.to_parent(&out)?))
}

/// Loads a pulse file, records it as an input and returns the pulse with a
/// short identifier derived from its digest.
pub fn load_pulse(ctx: &mut Context, path: &Path, n_sites: usize) -> CliResult<(Pulse, String)> {
    let (file, digest) = PulseFile::load(path)?;
    if let Some(n) = file.n_sites {
        if n != n_sites {
            return Err(CliError::validation(format!(
                "{}: pulse was made for {n} sites, run asks for {n_sites}",
                path.display()
            )));
        }
    }
    ctx.record_input(path, &digest);
    Ok((file.pulse, digest[..16].to_string()))
}

/// Where the state under study comes from.
pub enum Source {
    IdealGhz,
    Pulse(PathBuf),
}

impl Source {
    pub fn parse(s: &str) -> Self {
        if s == IDEAL_GHZ {
            Source::IdealGhz
        } else {
            Source::Pulse(PathBuf::from(s))
        }
    }
}

pub struct SourceState {
    pub state: StateVector,
    pub pulse: Option<Pulse>,
    pub id: String,
}

pub fn source_state(
    ctx: &mut Context,
    source: &str,
    basis: &Basis,
    v_mhz: f64,
    edge_shifts: bool,
    opts: &EvolveOptions,
) -> CliResult<SourceState> {
    match Source::parse(source) {
        Source::IdealGhz => Ok(SourceState {
            state: StateVector::ghz(basis, 0.0)?,
            pulse: None,
            id: IDEAL_GHZ.to_string(),
        }),
        Source::Pulse(path) => {
            let (pulse, id) = load_pulse(ctx, &path, basis.n_sites())?;
            let state = prepare_state(basis, v_mhz, edge_shifts, &pulse, opts)?;
            Ok(SourceState {
                state,
                pulse: Some(pulse),
                id,
            })
        }
    }
}

/// GHZ decomposition with β split into magnitude and phase for reports.
#[derive(Serialize)]
pub struct GhzReport {
    pub p_a: f64,
    pub p_abar: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub beta_abs: f64,
    pub fidelity: f64,
}

impl From<&GhzDecomposition> for GhzReport {
    fn from(d: &GhzDecomposition) -> Self {
        GhzReport {
            p_a: d.p_a,
            p_abar: d.p_abar,
            beta_re: d.beta_re,
            beta_im: d.beta_im,
            beta_abs: d.beta().norm(),
            fidelity: d.fidelity,
        }
    }
}

/// Independent sub-seeds for parts of a run, drawn from the master seed.
pub fn sub_seed(master: u64, stream: u64) -> u64 {
    use rand::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}
