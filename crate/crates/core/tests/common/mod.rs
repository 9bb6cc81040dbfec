#![allow(dead_code)]

use nalgebra::DMatrix;
use rydberg_ghz_core::basis::{symmetry_sector, Basis, ChainGeometry, Sector};
use rydberg_ghz_core::control::{
    optimize_dcrab, DcrabConfig, FomEvaluator, RampKind, RampSpec, SimulatedFom,
};
use rydberg_ghz_core::hamiltonian::{
    DriveModel, HamiltonianTerms, LocalShifts, Pulse, DEFAULT_V_MHZ,
};
use rydberg_ghz_core::propagator::{step_grid, EvolveOptions};
use rydberg_ghz_core::state::StateVector;
use rydberg_ghz_core::Complex64;

pub fn blockaded(n: usize) -> Basis {
    Basis::enumerate(ChainGeometry::blockaded(n)).unwrap()
}

/// Even-sector preparation model with the standard edge shifts.
pub fn preparation_model(basis: &Basis) -> DriveModel {
    let terms = HamiltonianTerms::new(basis, DEFAULT_V_MHZ);
    let n = basis.n_sites();
    DriveModel::in_sector(
        basis,
        &terms,
        &LocalShifts::preparation(n),
        symmetry_sector(basis, Sector::Even),
    )
    .unwrap()
}

pub fn ghz_fom(basis: &Basis) -> SimulatedFom {
    let model = preparation_model(basis);
    SimulatedFom::new(
        model,
        &StateVector::ground(basis),
        &StateVector::ghz(basis, 0.0).unwrap(),
        EvolveOptions::default(),
    )
    .unwrap()
}

/// Piecewise-constant evolution with the same midpoint grid as the Krylov
/// propagator, but through dense matrix exponentials.
pub fn dense_evolve(
    model: &DriveModel,
    pulse: &Pulse,
    psi: &[Complex64],
    dt: f64,
) -> Vec<Complex64> {
    let (steps, dt) = step_grid(pulse.duration_us, dt).unwrap();
    let n = model.dim();
    let mut v = nalgebra::DVector::from_column_slice(psi);
    for k in 0..steps {
        let (om, de) = pulse.sample_controls((k as f64 + 0.5) * dt).unwrap();
        let h = model.hamiltonian(om, de).to_dense();
        let m = DMatrix::from_fn(n, n, |r, c| Complex64::new(0.0, -h[r * n + c] * dt));
        v = m.exp() * v;
    }
    v.iter().copied().collect()
}

pub struct Prepared {
    pub n: usize,
    pub basis: Basis,
    pub linear_fom: f64,
    pub pulse: Pulse,
    pub fom: f64,
    pub evaluations: usize,
    /// Final state over the blockaded basis.
    pub state: StateVector,
}

/// dCRAB-optimized GHZ preparation at T = 1.1 µs from the linear guess.
pub fn prepare(n: usize) -> Prepared {
    let basis = blockaded(n);
    let mut fom = ghz_fom(&basis);
    let guess = RampSpec::new(RampKind::Linear, 1.1).linear_pulse();
    let out = optimize_dcrab(&guess, &mut fom, &DcrabConfig::default()).unwrap();
    let state = StateVector::from_amplitudes(
        fom.model()
            .to_parent(&fom.final_state(&out.pulse).unwrap())
            .unwrap(),
    );
    let check = fom.evaluate(&out.pulse).unwrap();
    assert!((check - out.fom).abs() < 1e-12);
    Prepared {
        n,
        linear_fom: out.initial_fom,
        pulse: out.pulse,
        fom: out.fom,
        evaluations: out.evaluations,
        state,
        basis,
    }
}
