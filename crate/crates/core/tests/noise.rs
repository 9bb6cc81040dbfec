mod common;

use proptest::prelude::*;
use rydberg_ghz_core::basis::ChainGeometry;
use rydberg_ghz_core::hamiltonian::{LocalShifts, Pulse, DEFAULT_V_MHZ};
use rydberg_ghz_core::noise::{
    decohered_ghz_coherence, disorder_realization, doppler_coherence_oracle,
    doppler_coherence_time, hold_state, noisy_preparation, noisy_realization, DisorderRealization,
    NoiseModel, BOND_FACTOR_RANGE,
};
use rydberg_ghz_core::propagator::EvolveOptions;
use rydberg_ghz_core::state::StateVector;
use rydberg_ghz_core::Complex64;

use common::{blockaded, prepare};

#[test]
fn detuning_draws_have_the_requested_spread() {
    let sigma = 0.043;
    let model = NoiseModel {
        position_sigma: 0.05,
        ..NoiseModel::doppler_only(sigma)
    };
    let g = ChainGeometry::blockaded(8);
    let draws: Vec<DisorderRealization> = (0..4000)
        .map(|k| disorder_realization(&model, &g, k))
        .collect();
    let all: Vec<f64> = draws
        .iter()
        .flat_map(|r| r.detuning_mhz.iter().copied())
        .collect();
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    assert!(
        (var / (sigma * sigma) - 1.0).abs() < 0.05,
        "variance ratio {}",
        var / (sigma * sigma)
    );
    assert!(mean.abs() < 4.0 * sigma / n.sqrt());

    // Neighbouring sites are uncorrelated.
    let m = draws.len() as f64;
    let corr = draws
        .iter()
        .map(|r| r.detuning_mhz[0] * r.detuning_mhz[1])
        .sum::<f64>()
        / m
        / (sigma * sigma);
    assert!(corr.abs() < 3.0 / m.sqrt(), "correlation {corr}");

    for r in &draws {
        assert!(r
            .bond_multipliers
            .iter()
            .all(|&x| (BOND_FACTOR_RANGE.0..=BOND_FACTOR_RANGE.1).contains(&x)));
    }
}

#[test]
fn realizations_are_addressable_by_index() {
    let model = NoiseModel {
        seed: 12,
        ..NoiseModel::default()
    };
    let g = ChainGeometry::blockaded(6);
    let forward: Vec<_> = (0..10)
        .map(|k| disorder_realization(&model, &g, k))
        .collect();
    for k in (0..10).rev() {
        assert_eq!(disorder_realization(&model, &g, k), forward[k as usize]);
    }
    let other = NoiseModel { seed: 13, ..model };
    assert_ne!(disorder_realization(&other, &g, 0), forward[0]);
}

#[test]
fn doppler_average_matches_closed_form() {
    let sigma = 0.043;
    let n = 6;
    let b = blockaded(n);
    let ghz = StateVector::ghz(&b, 0.0).unwrap();
    let mut model = NoiseModel::doppler_only(sigma);
    model.n_realizations = 2000;
    model.seed = 4;
    let t_c = doppler_coherence_time(sigma, n);
    assert!((doppler_coherence_oracle(sigma, n, t_c) - (-1.0f64).exp()).abs() < 1e-14);
    let delays: Vec<f64> = (0..=10).map(|j| 0.2 * t_c * j as f64).collect();
    let d = decohered_ghz_coherence(&b, &ghz.amplitudes, DEFAULT_V_MHZ, &model, &delays).unwrap();
    assert!((d.mean_abs_beta[0] - 0.5).abs() < 1e-14);
    for (j, &t) in delays.iter().enumerate() {
        let o = 0.5 * doppler_coherence_oracle(sigma, n, t);
        assert!(
            (d.mean_abs_beta[j] - o).abs() < 4.0 * d.stderr[j] + 1e-12,
            "t = {t}"
        );
    }
    assert!((d.gaussian.timescale_us / t_c - 1.0).abs() < 0.1);
    assert!(d.gaussian.rms_residual < d.exponential.rms_residual);
}

#[test]
fn zero_spread_gives_a_flat_curve() {
    let b = blockaded(8);
    let ghz = StateVector::ghz(&b, 0.0).unwrap();
    let mut model = NoiseModel::noiseless();
    model.n_realizations = 10;
    let delays = [0.0, 1.0, 2.0, 5.0];
    let d = decohered_ghz_coherence(&b, &ghz.amplitudes, DEFAULT_V_MHZ, &model, &delays).unwrap();
    assert!(d.mean_abs_beta.iter().all(|&x| (x - 0.5).abs() < 1e-14));
    assert!(d.gaussian.timescale_us.is_infinite());
    assert!(d.survival.iter().all(|&s| s == 1.0));
}

#[test]
fn survival_follows_the_decay_rate() {
    let model = NoiseModel::default();
    let s = model.survival(8, 4.0, 2.0);
    let expect = (-2.0f64 * (4.0 / 150.0 + 8.0 / 150.0)).exp();
    assert!((s - expect).abs() < 1e-15);

    // With Ω = 0 nothing is excited, so only scattering contributes.
    let n = 4;
    let b = blockaded(n);
    let mut quiet = NoiseModel::noiseless();
    quiet.scattering_time_us = Some(75.0);
    let pulse = Pulse::constant(1.0, 0.0, 0.0);
    let out = noisy_realization(
        &b,
        DEFAULT_V_MHZ,
        &LocalShifts::zeros(n),
        &pulse,
        &quiet,
        0,
        &EvolveOptions::default(),
    )
    .unwrap();
    assert!((out.survival - (-(n as f64) / 150.0).exp()).abs() < 1e-12);
}

#[test]
fn noise_lowers_an_optimized_preparation() {
    let p = prepare(4);
    let shifts = LocalShifts::preparation(4);
    let opts = EvolveOptions::default();
    let clean = noisy_preparation(
        &p.basis,
        DEFAULT_V_MHZ,
        &shifts,
        &p.pulse,
        &NoiseModel {
            n_realizations: 1,
            ..NoiseModel::noiseless()
        },
        &opts,
    )
    .unwrap();
    assert!((clean.mean_fidelity - p.fom).abs() < 1e-9);

    let mut model = NoiseModel::default();
    model.n_realizations = 50;
    let noisy =
        noisy_preparation(&p.basis, DEFAULT_V_MHZ, &shifts, &p.pulse, &model, &opts).unwrap();
    assert!(noisy.mean_fidelity < clean.mean_fidelity);

    // Four times the realizations halves the standard error, roughly.
    model.n_realizations = 200;
    let more =
        noisy_preparation(&p.basis, DEFAULT_V_MHZ, &shifts, &p.pulse, &model, &opts).unwrap();
    let ratio = more.stderr_fidelity / noisy.stderr_fidelity;
    assert!((0.35..0.7).contains(&ratio), "stderr ratio {ratio}");
    assert!((more.mean_fidelity - noisy.mean_fidelity).abs() < 4.0 * noisy.stderr_fidelity);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn holds_only_move_phases(
        n in 2usize..=10,
        k in 0u64..1000,
        t in 0.0f64..20.0,
        amps in proptest::collection::vec(-1.0f64..1.0, 300),
    ) {
        let b = blockaded(n);
        let model = NoiseModel::default();
        let r = disorder_realization(&model, b.geometry(), k);
        let psi: Vec<Complex64> = (0..b.len()).map(|i| Complex64::new(amps[i % 300], amps[(i + 150) % 300])).collect();
        let out = hold_state(&b, &psi, DEFAULT_V_MHZ, &r, t).unwrap();
        for (a, o) in psi.iter().zip(&out) {
            prop_assert!((a.norm_sqr() - o.norm_sqr()).abs() < 1e-12);
        }
    }
}
