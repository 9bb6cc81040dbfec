mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rydberg_ghz_core::basis::{Basis, ChainGeometry};
use rydberg_ghz_core::control::{optimize_dcrab, DcrabConfig, NelderMeadOptions};
use rydberg_ghz_core::detection::{sample_shots, DetectionModel};
use rydberg_ghz_core::hamiltonian::{HamiltonianTerms, DEFAULT_V_MHZ};
use rydberg_ghz_core::propagator::EvolveOptions;
use rydberg_ghz_core::protocols::{
    apply_ux, bell_distribution_protocol, coherence_lower_bound, default_scan_times,
    density_parity_scan, dimer_model_contrast, direct_ghz_fidelity, exact_ghz_decomposition,
    fidelity_lower_bound, forward_state, g2_from_shots, g2_from_state, ghz_contrast,
    optimal_ux_duration, parity_expectation, parity_oscillation_scan, reverse_guess,
    reverse_sweep_fom, BellConfig, DensityMatrix, Readout, ReadoutSpec, REVERSE_DURATION_US,
    REVERSE_END_MHZ,
};
use rydberg_ghz_core::state::StateVector;
use rydberg_ghz_core::units::Mhz;
use rydberg_ghz_core::Complex64;

use common::{blockaded, prepare};

const DELTA_P: f64 = 3.8;

fn ideal_readout(b: &Basis) -> Readout {
    Readout::new(
        b,
        ReadoutSpec::IdealPiHalf,
        DEFAULT_V_MHZ,
        EvolveOptions::default(),
    )
    .unwrap()
}

#[test]
fn ideal_ghz_has_full_contrast() {
    let b = blockaded(4);
    let ghz = StateVector::ghz(&b, 0.0).unwrap();
    let times = default_scan_times(4, DELTA_P);
    let scan = parity_oscillation_scan(
        &b,
        &ghz.amplitudes,
        Mhz(DELTA_P),
        &ideal_readout(&b),
        &times,
    )
    .unwrap();
    assert!((scan.fit.amplitude - 1.0).abs() < 1e-10);
    assert!((scan.fit.frequency_mhz - 4.0 * DELTA_P).abs() < 1e-12);
    let bound = coherence_lower_bound(&scan);
    assert!((bound.magnitude - 0.5).abs() < 1e-10);
    let d = exact_ghz_decomposition(&b, &ghz.amplitudes).unwrap();
    assert!((fidelity_lower_bound(d.target_population(), scan.fit.amplitude) - 1.0).abs() < 1e-10);
}

#[test]
fn classical_mixture_has_no_contrast() {
    let b = blockaded(4);
    let (a, abar) = b.ghz_components().unwrap();
    let basis_vec = |i: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); b.len()];
        v[i] = Complex64::new(1.0, 0.0);
        v
    };
    let rho = DensityMatrix::mixture(&[(0.5, basis_vec(a)), (0.5, basis_vec(abar))]).unwrap();
    let d = rho.ghz_decomposition(&b).unwrap();
    assert_eq!(d.beta().norm(), 0.0);
    assert!((d.fidelity - 0.5).abs() < 1e-15);
    let times = default_scan_times(4, DELTA_P);
    let scan = density_parity_scan(&b, &rho, Mhz(DELTA_P), &ideal_readout(&b), &times).unwrap();
    assert!(scan.fit.amplitude.abs() < 1e-10);
}

#[test]
fn contrast_bounds_fidelity_for_six_atoms() {
    let b = blockaded(6);
    let times = default_scan_times(6, DELTA_P);
    let (dur, _) = optimal_ux_duration(&b, 5.0, DEFAULT_V_MHZ, 0.2, 1e-3).unwrap();
    let interacting = Readout::new(
        &b,
        ReadoutSpec::Interacting {
            omega_mhz: 5.0,
            duration_us: dur,
        },
        DEFAULT_V_MHZ,
        EvolveOptions::default(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for k in 0..20 {
        let rho = DensityMatrix::random_ghz_like(&b, 1 + k % 3, 0.3, &mut rng).unwrap();
        let d = rho.ghz_decomposition(&b).unwrap();
        let readout = if k % 2 == 0 {
            &interacting
        } else {
            &ideal_readout(&b)
        };
        let scan = density_parity_scan(&b, &rho, Mhz(DELTA_P), readout, &times).unwrap();
        // The bound at the fitted phase never exceeds the best-phase fidelity.
        let bound = fidelity_lower_bound(d.target_population(), scan.fit.amplitude);
        assert!(bound <= 0.5 * d.target_population() + d.beta().norm() + 1e-9);
    }
}

#[test]
fn interacting_readout_contrast_falls_with_length() {
    let mut last = f64::INFINITY;
    for n in [4usize, 8, 12] {
        let (_, c) = optimal_ux_duration(&blockaded(n), 5.0, DEFAULT_V_MHZ, 0.2, 1e-3).unwrap();
        assert!(c < last, "n = {n}: {c}");
        if n == 4 {
            assert!(c < 1.0);
        }
        last = c;
    }
}

#[test]
fn single_dimer_matches_two_atoms() {
    let omega = 5.0;
    let (max_t, steps) = (0.2, 200);
    let dimer = dimer_model_contrast(1, omega, DEFAULT_V_MHZ, 0.4, max_t, steps).unwrap();
    let b = blockaded(2);
    for (j, &t) in dimer.times_us.iter().enumerate() {
        let r = Readout::new(
            &b,
            ReadoutSpec::Interacting {
                omega_mhz: omega,
                duration_us: t,
            },
            DEFAULT_V_MHZ,
            EvolveOptions::default(),
        )
        .unwrap();
        let c = ghz_contrast(&b, &r).unwrap();
        assert!(
            (c - dimer.contrast[j]).abs() < 1e-8,
            "t = {t}: {c} vs {}",
            dimer.contrast[j]
        );
    }
    assert!(dimer_model_contrast(0, omega, 0.0, 0.0, max_t, steps).is_err());
}

#[test]
fn zero_duration_readout_is_identity() {
    let b = blockaded(6);
    let ghz = StateVector::ghz(&b, 0.3).unwrap();
    let out = apply_ux(&b, &ghz.amplitudes, 5.0, 0.0, DEFAULT_V_MHZ).unwrap();
    assert_eq!(out, ghz.amplitudes);
}

#[test]
fn parity_of_basis_states() {
    let b = blockaded(4);
    let ground = StateVector::ground(&b);
    assert_eq!(parity_expectation(&b, &ground.amplitudes).unwrap(), 1.0);
    let one = StateVector::basis_state(&b, 0b0100).unwrap();
    assert_eq!(parity_expectation(&b, &one.amplitudes).unwrap(), -1.0);
    let ghz = StateVector::ghz(&b, 0.0).unwrap();
    assert!((parity_expectation(&b, &ghz.amplitudes).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn shot_correlations_approach_the_state() {
    let b = blockaded(6);
    let ghz = StateVector::ghz(&b, 0.0).unwrap();
    let exact = g2_from_state(&b, &ghz.amplitudes).unwrap();
    assert!((exact.get(1, 2) + 0.25).abs() < 1e-14);
    assert!((exact.get(1, 3) - 0.25).abs() < 1e-14);
    let n_shots = 40_000;
    let shots = sample_shots(&b, &ghz.amplitudes, n_shots, &DetectionModel::ideal(), 2).unwrap();
    let est = g2_from_shots(b.geometry(), &shots.shots).unwrap();
    for (x, y) in est.matrix.iter().zip(&exact.matrix) {
        assert!((x - y).abs() < 5.0 / (n_shots as f64).sqrt());
    }
    assert!(g2_from_shots(b.geometry(), &[]).is_err());
}

#[test]
fn bell_pair_is_distributed_to_the_edges() {
    let n = 4;
    let p = prepare(n);
    let terms = HamiltonianTerms::new(&p.basis, DEFAULT_V_MHZ);
    let cfg = BellConfig::default();
    let opts = EvolveOptions::default();
    let start = forward_state(&p.basis, &terms, &p.pulse, &opts).unwrap();
    assert!((start.overlap(&StateVector::ghz(&p.basis, 0.0).unwrap()) - p.fom).abs() < 1e-9);

    let mut fom = reverse_sweep_fom(&p.basis, &terms, &start, &cfg, opts).unwrap();
    let dcrab = DcrabConfig {
        super_iterations: 3,
        nelder_mead: NelderMeadOptions {
            max_evaluations: 150,
            ..NelderMeadOptions::default()
        },
        ..DcrabConfig::default()
    };
    let guess = reverse_guess(REVERSE_DURATION_US, REVERSE_END_MHZ);
    let reverse = optimize_dcrab(&guess, &mut fom, &dcrab).unwrap();

    let report =
        bell_distribution_protocol(&p.basis, &terms, &p.pulse, Some(&reverse.pulse), &cfg).unwrap();
    assert!((report.psi_plus_fidelity - reverse.fom).abs() < 1e-9);
    let bulk_ground: f64 = report.site_populations[1..n - 1]
        .iter()
        .map(|x| 1.0 - x)
        .product();
    assert!(bulk_ground > 0.95, "bulk ground {bulk_ground}");
    assert!(report.edge_purity > 0.9);
    assert!(
        report.fidelity_bound > 0.9,
        "bound {}",
        report.fidelity_bound
    );
    // The contrast is phase-blind, so the bound sits below the best-phase
    // Bell fidelity P/2 + |coherence| ≤ P/2 + 1/2.
    assert!(report.fidelity_bound <= 0.5 * report.target_patterns + 0.5 + 1e-12);
    assert!(report.parity_fit.amplitude <= 1.0 + 1e-9);
    assert!((report.edge_patterns.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let skipped = bell_distribution_protocol(&p.basis, &terms, &p.pulse, None, &cfg).unwrap();
    assert!(skipped.edge_purity < 0.6);
    assert!(skipped.psi_plus_fidelity < 0.05);

    let odd = Basis::enumerate(ChainGeometry::blockaded(5)).unwrap();
    let terms5 = HamiltonianTerms::new(&odd, DEFAULT_V_MHZ);
    assert!(bell_distribution_protocol(&odd, &terms5, &p.pulse, None, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fidelity_identity_holds_for_mixed_states(seed in any::<u64>(), rank in 1usize..5, leakage in 0.0f64..1.0) {
        let b = blockaded(6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::random_ghz_like(&b, rank, leakage, &mut rng).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        let d = rho.ghz_decomposition(&b).unwrap();
        let direct = direct_ghz_fidelity(&b, &rho).unwrap();
        prop_assert!((d.fidelity - direct).abs() < 1e-12);
        prop_assert!((d.fidelity - (0.5 * (d.p_a + d.p_abar) + d.beta_re)).abs() < 1e-12);
        prop_assert!(d.beta().norm() <= (d.p_a * d.p_abar).sqrt() + 1e-12);
    }
}
