mod common;

use proptest::prelude::*;
use rydberg_ghz_core::basis::{Basis, ChainGeometry};
use rydberg_ghz_core::detection::{
    bootstrap_uncertainty, confusion_matrix, infer_true_distribution, sample_shots,
    ConfusionMatrix, DetectionModel, GroupedDistribution, Grouping, InferenceOptions,
};
use rydberg_ghz_core::state::StateVector;
use rydberg_ghz_core::Complex64;

const GROUPINGS: [Grouping; 2] = [Grouping::ExcitationCount, Grouping::MagnetizationExcitation];

/// Confusion matrix by enumerating every detected bitstring of one
/// representative per true group.
fn brute_matrix(grouping: Grouping, n: usize, model: &DetectionModel) -> Vec<f64> {
    let g = grouping.n_groups(n);
    let mut rep = vec![None; g];
    for c in 0u64..1 << n {
        let k = grouping.group_of(n, c);
        rep[k].get_or_insert(c);
    }
    let mut m = vec![0.0; g * g];
    for (truth, c) in rep.iter().enumerate() {
        let c = c.expect("every group is populated");
        for d in 0u64..1 << n {
            let mut p = 1.0;
            for bit in 0..n {
                let t = c >> bit & 1;
                let r = d >> bit & 1;
                p *= match (t, r) {
                    (0, 0) => 1.0 - model.p10,
                    (0, _) => model.p10,
                    (_, 0) => model.p01,
                    _ => 1.0 - model.p01,
                };
            }
            m[grouping.group_of(n, d) * g + truth] += p;
        }
    }
    m
}

fn simplex(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

#[test]
fn two_sites_one_flip() {
    let p = 0.03;
    let model = DetectionModel::new(p, 0.0).unwrap();
    let m = confusion_matrix(Grouping::ExcitationCount, 2, &model).unwrap();
    assert!((m.get(1, 0) - 2.0 * p * (1.0 - p)).abs() < 1e-15);
    assert!((m.get(0, 0) - (1.0 - p) * (1.0 - p)).abs() < 1e-15);
    assert_eq!(m.get(0, 1), 0.0);
    assert!((m.get(1, 1) - (1.0 - p)).abs() < 1e-15);
}

#[test]
fn matrices_match_flip_enumeration() {
    let model = DetectionModel::default();
    for n in 1..=9 {
        for grouping in GROUPINGS {
            let m = confusion_matrix(grouping, n, &model).unwrap();
            let b = brute_matrix(grouping, n, &model);
            for (x, y) in m.data.iter().zip(&b) {
                assert!((x - y).abs() < 1e-13, "n = {n} {grouping:?}");
            }
        }
    }
}

#[test]
fn invalid_models_are_rejected() {
    assert!(DetectionModel::new(0.5, 0.0).is_err());
    assert!(DetectionModel::new(-0.01, 0.0).is_err());
    assert!(DetectionModel::new(0.0, f64::NAN).is_err());
}

#[test]
fn ghz_diagonal_degrades_with_error_rates() {
    let n = 10;
    let (a, _) = Grouping::MagnetizationExcitation.ghz_groups(n).unwrap();
    let mut last = 1.0;
    for p01 in [0.0, 0.01, 0.02, 0.05, 0.1] {
        let m = confusion_matrix(
            Grouping::MagnetizationExcitation,
            n,
            &DetectionModel::new(0.0063, p01).unwrap(),
        )
        .unwrap();
        let d = m.get(a, a);
        assert!(d < last);
        last = d;
    }
}

#[test]
fn ideal_detection_returns_the_raw_distribution() {
    let raw = simplex(&[3.0, 1.0, 0.5, 2.0, 0.25]);
    let out = GroupedDistribution::from_measured(
        raw.clone(),
        4,
        Grouping::ExcitationCount,
        &DetectionModel::ideal(),
        &InferenceOptions::default(),
    )
    .unwrap();
    for (x, y) in out.inferred.iter().zip(&raw) {
        assert!((x - y).abs() < 1e-12);
    }
    assert!(out.diagnostics.active_set.is_empty());
}

#[test]
fn shot_noise_residual_is_small() {
    let n = 8;
    let b = Basis::enumerate(ChainGeometry::blockaded(n)).unwrap();
    let psi = StateVector::ghz(&b, 0.0).unwrap();
    let model = DetectionModel::default();
    let n_shots = 20_000;
    let shots = sample_shots(&b, &psi.amplitudes, n_shots, &model, 5).unwrap();
    assert_eq!(shots.seed, Some(5));
    let out = GroupedDistribution::from_shots(
        &shots,
        Grouping::MagnetizationExcitation,
        &model,
        &InferenceOptions::default(),
    )
    .unwrap();
    assert!(out.diagnostics.residual_norm < 2.0 / (n_shots as f64).sqrt());
    let (ia, iabar) = Grouping::MagnetizationExcitation.ghz_groups(n).unwrap();
    let pop = out.inferred[ia] + out.inferred[iabar];
    let sigma = (1.0 / n_shots as f64).sqrt();
    assert!((pop - 1.0).abs() < 6.0 * sigma, "{pop}");
}

#[test]
fn sampling_validation_and_determinism() {
    let b = Basis::enumerate(ChainGeometry::blockaded(4)).unwrap();
    let psi = StateVector::ghz(&b, 0.0).unwrap();
    let model = DetectionModel::default();
    assert!(sample_shots(&b, &psi.amplitudes, 0, &model, 1).is_err());
    let a = sample_shots(&b, &psi.amplitudes, 500, &model, 9).unwrap();
    let c = sample_shots(&b, &psi.amplitudes, 500, &model, 9).unwrap();
    let d = sample_shots(&b, &psi.amplitudes, 500, &model, 10).unwrap();
    assert_eq!(a, c);
    assert_ne!(a.shots, d.shots);
    // Ideal detection never leaves the support of the state.
    let clean = sample_shots(&b, &psi.amplitudes, 500, &DetectionModel::ideal(), 3).unwrap();
    assert!(clean.shots.iter().all(|&s| s == 0b0101 || s == 0b1010));
}

#[test]
fn bootstrap_shrinks_with_shots_and_is_reproducible() {
    let n = 6;
    let grouping = Grouping::MagnetizationExcitation;
    let model = DetectionModel::default();
    let m = confusion_matrix(grouping, n, &model).unwrap();
    let mut truth = vec![0.0; grouping.n_groups(n)];
    let (ia, iabar) = grouping.ghz_groups(n).unwrap();
    truth[ia] = 0.45;
    truth[iabar] = 0.45;
    truth[0] = 0.1;
    let measured = m.apply(&truth);
    let opts = InferenceOptions::default();
    let small =
        bootstrap_uncertainty(&measured, 10_000, grouping, n, &model, 60, 3, &opts).unwrap();
    let large =
        bootstrap_uncertainty(&measured, 400_000, grouping, n, &model, 60, 3, &opts).unwrap();
    let again =
        bootstrap_uncertainty(&measured, 10_000, grouping, n, &model, 60, 3, &opts).unwrap();
    assert_eq!(small, again);
    let s = small.sigma.unwrap();
    let l = large.sigma.unwrap();
    assert!(l[ia] < s[ia] && l[iabar] < s[iabar]);
    assert!((small.mean[ia] - 0.45).abs() < 0.02);
    assert!(bootstrap_uncertainty(&measured, 0, grouping, n, &model, 10, 3, &opts).is_err());
    assert!(bootstrap_uncertainty(&measured, 100, grouping, n, &model, 0, 3, &opts).is_err());
}

#[test]
fn excitation_distribution_of_ghz() {
    let b = Basis::enumerate(ChainGeometry::blockaded(6)).unwrap();
    let psi = StateVector::ghz(&b, 0.0).unwrap();
    let w = Grouping::ExcitationCount
        .distribution(&b, &psi.amplitudes)
        .unwrap();
    assert!((w[3] - 1.0).abs() < 1e-14);
    assert!(Grouping::ExcitationCount
        .distribution(&b, &[Complex64::new(1.0, 0.0)])
        .is_err());
}

fn grouping_strategy() -> impl Strategy<Value = Grouping> {
    prop_oneof![
        Just(Grouping::ExcitationCount),
        Just(Grouping::MagnetizationExcitation)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn matrices_are_column_stochastic(
        n in 1usize..=20,
        p10 in 0.0f64..0.2,
        p01 in 0.0f64..0.2,
        grouping in grouping_strategy(),
    ) {
        let m: ConfusionMatrix = confusion_matrix(grouping, n, &DetectionModel::new(p10, p01).unwrap()).unwrap();
        prop_assert!(m.stochastic_defect() < 1e-12);
        prop_assert!(m.data.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn inference_inverts_the_channel(
        n in 1usize..=12,
        p10 in 0.0f64..0.05,
        p01 in 0.0f64..0.05,
        grouping in grouping_strategy(),
        raw in proptest::collection::vec(0.01f64..1.0, 49),
    ) {
        let m = confusion_matrix(grouping, n, &DetectionModel::new(p10, p01).unwrap()).unwrap();
        let v = simplex(&raw[..m.n.min(raw.len())].iter().copied().chain(std::iter::repeat(0.5)).take(m.n).collect::<Vec<_>>());
        let w = m.apply(&v);
        let out = infer_true_distribution(&w, &m, &InferenceOptions::default()).unwrap();
        for (x, y) in out.v.iter().zip(&v) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn inferred_values_stay_on_the_simplex(
        n in 1usize..=8,
        grouping in grouping_strategy(),
        raw in proptest::collection::vec(-0.2f64..1.0, 25),
    ) {
        let model = DetectionModel::default();
        let m = confusion_matrix(grouping, n, &model).unwrap();
        let w: Vec<f64> = raw.iter().copied().cycle().take(m.n).collect();
        let out = infer_true_distribution(&w, &m, &InferenceOptions::default()).unwrap();
        prop_assert!(out.v.iter().all(|&x| x >= 0.0));
        prop_assert!((out.v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(out.kkt_residual <= 1e-10);
        for &i in &out.active_set {
            prop_assert_eq!(out.v[i], 0.0);
        }
    }
}
