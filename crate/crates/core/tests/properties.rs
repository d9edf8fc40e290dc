use proptest::prelude::*;
use qcc_core::correlated::{
    correlated_coherence, correlated_coherence_canonical, CanonicalBasisMode,
};
use qcc_core::linalg::{self, CMatrix};
use qcc_core::stategen::{random_mixed_bipartite, random_unitary};
use qcc_core::{LocalBasis, OptimizerConfig, ProductBasisChoice, Side};

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=3, 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn correlated_coherence_is_non_negative_in_any_product_basis((da, db) in dims(), rank in 1usize..=4, seed in any::<u64>()) {
        let rho = random_mixed_bipartite(da, db, rank, seed).unwrap();
        let basis = ProductBasisChoice::new(LocalBasis::haar(da, seed ^ 1), LocalBasis::haar(db, seed ^ 2));
        prop_assert!(correlated_coherence(&rho, &basis).unwrap() >= -1e-12);
    }

    #[test]
    fn local_unitaries_carry_the_canonical_value((da, db) in dims(), seed in any::<u64>()) {
        let rho = random_mixed_bipartite(da, db, 3, seed).unwrap();
        let (ua, ub) = (random_unitary(da, seed ^ 3), random_unitary(db, seed ^ 4));
        let moved = rho.apply_unitary(&ua, &[0]).unwrap().apply_unitary(&ub, &[1]).unwrap();
        let config = OptimizerConfig::degeneracy().with_seed(seed);
        let before = correlated_coherence_canonical(&rho, CanonicalBasisMode::MinimizedOverDegeneracy, &config).unwrap();
        let after = correlated_coherence_canonical(&moved, CanonicalBasisMode::MinimizedOverDegeneracy, &config).unwrap();
        prop_assert!((before.value - after.value).abs() < 1e-7, "{} vs {}", before.value, after.value);
    }

    #[test]
    fn partial_traces_keep_unit_trace((da, db) in dims(), rank in 1usize..=6, seed in any::<u64>()) {
        let rho = random_mixed_bipartite(da, db, rank.min(da * db), seed).unwrap();
        for side in [Side::A, Side::B] {
            let m = rho.marginal(side).unwrap();
            prop_assert!((linalg::trace(m.matrix()).re - 1.0).abs() < 1e-12);
            prop_assert!(linalg::hermiticity_residual(m.matrix()) < 1e-13);
        }
    }

    #[test]
    fn eigh_reconstructs_degenerate_spectra(n in 1usize..=8, levels in prop::collection::vec(-2i32..=2, 8), seed in any::<u64>()) {
        let u = random_unitary(n, seed);
        let diag = CMatrix::from_fn(n, n, |i, j| if i == j { linalg::real(levels[i] as f64) } else { linalg::ZERO });
        let h = &u * diag * linalg::dagger(&u);
        let (vals, vecs) = linalg::eigh(&h);
        prop_assert!(vals.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        prop_assert!(linalg::unitarity_residual(&vecs) < 1e-10);
        let back = CMatrix::from_fn(n, n, |i, j| if i == j { linalg::real(vals[i]) } else { linalg::ZERO });
        prop_assert!(linalg::max_abs_diff(&(&vecs * back * linalg::dagger(&vecs)), &h) < 1e-10);
    }
}
