use proptest::prelude::*;
use rydberg_ghz_core::basis::{
    basis_size, sector_weight, staggered_magnetization, symmetry_sector, Basis, ChainGeometry,
    Sector,
};
use rydberg_ghz_core::Complex64;

fn brute(n: usize, max_pairs: u32) -> Vec<u64> {
    (0u64..1 << n)
        .filter(|c| (c & (c >> 1)).count_ones() <= max_pairs)
        .collect()
}

#[test]
fn n20_size_is_fibonacci() {
    assert_eq!(basis_size(&ChainGeometry::blockaded(20)), 17711);
    assert_eq!(
        Basis::enumerate(ChainGeometry::blockaded(20))
            .unwrap()
            .len(),
        17711
    );
}

#[test]
fn four_site_sectors() {
    let b = Basis::enumerate(ChainGeometry::blockaded(4)).unwrap();
    assert_eq!(b.len(), 8);
    assert_eq!(symmetry_sector(&b, Sector::Even).len(), 5);
    assert_eq!(symmetry_sector(&b, Sector::Odd).len(), 3);
}

#[test]
fn capacity_is_enforced() {
    let g = ChainGeometry::full(20);
    assert!(Basis::enumerate_with_capacity(g, 1000).is_err());
}

#[test]
fn ghz_components_have_extreme_magnetization() {
    for n in (2..=20).step_by(2) {
        let b = Basis::enumerate(ChainGeometry::blockaded(n)).unwrap();
        let (a, abar) = b.ghz_components().unwrap();
        assert_eq!(b.magnetization(a), n as i32);
        assert_eq!(b.magnetization(abar), -(n as i32));
        assert_eq!(b.parity(a), b.parity(abar));
        assert_eq!(b.partner(a), abar);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_brute_force(n in 1usize..=14, pairs in 0usize..3) {
        let g = ChainGeometry::new(n, pairs.min(n - 1), 3).unwrap();
        let pairs = pairs.min(n - 1);
        let b = Basis::enumerate(g).unwrap();
        let expect = brute(n, pairs as u32);
        prop_assert_eq!(b.configs(), &expect[..]);
        prop_assert_eq!(basis_size(&g), expect.len() as u64);
        for (i, &c) in b.configs().iter().enumerate() {
            prop_assert_eq!(b.index_of(c), Some(i));
            prop_assert_eq!(b.excitations(i), c.count_ones());
            prop_assert_eq!(b.magnetization(i), staggered_magnetization(&g, c));
        }
    }

    #[test]
    fn reflection_is_an_involution(n in 1usize..=16, seed in any::<u64>()) {
        let g = ChainGeometry::full(n);
        let c = seed & g.full_mask();
        prop_assert_eq!(g.reflect(g.reflect(c)), c);
        prop_assert_eq!(g.reflect(c).count_ones(), c.count_ones());
        prop_assert_eq!(g.parse_pattern(&g.format_pattern(c)).unwrap(), c);
    }

    #[test]
    fn sectors_split_the_space(n in 2usize..=12, amps in proptest::collection::vec(-1.0f64..1.0, 400)) {
        let b = Basis::enumerate(ChainGeometry::blockaded(n)).unwrap();
        let even = symmetry_sector(&b, Sector::Even);
        let odd = symmetry_sector(&b, Sector::Odd);
        prop_assert_eq!(even.len() + odd.len(), b.len());
        let psi: Vec<Complex64> = (0..b.len()).map(|i| Complex64::new(amps[i % 400], amps[(i * 7 + 3) % 400])).collect();
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        let we = sector_weight(&even, &psi).unwrap();
        let wo = sector_weight(&odd, &psi).unwrap();
        prop_assert!((we + wo - norm).abs() < 1e-10 * norm.max(1.0));
        // Round trip through the even sector is a projector.
        let p = even.embed(&even.project(&psi).unwrap()).unwrap();
        let pp = even.embed(&even.project(&p).unwrap()).unwrap();
        for (x, y) in p.iter().zip(&pp) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }
}
