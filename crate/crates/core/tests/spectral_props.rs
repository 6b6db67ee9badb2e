use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_forge::kato::*;
use spectral_forge::spectral::*;

fn spectrum() -> impl Strategy<Value = SpectrumList> {
    prop::collection::vec(0.0f64..50.0, 1..40).prop_map(|v| SpectrumList::from_unsorted(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sandwich_always_holds(spec in spectrum(), t in 0.0f64..60.0, delta in 1e-6f64..5.0) {
        let r = sandwich_check(&spec, t, delta).unwrap();
        prop_assert!(r.lower_holds && r.upper_holds, "{r:?}");
    }

    #[test]
    fn smoothed_counting_is_monotone(spec in spectrum(), t in 0.0f64..60.0, dt in 0.0f64..5.0, w in 0.0f64..3.0) {
        prop_assert!(smoothed_counting(&spec, t, w) <= smoothed_counting(&spec, t + dt, w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn contour_projection_matches_eigenvectors(seed in any::<u64>(), dim in 3usize..8, mult in 1usize..3, eps in 0.0f64..0.1) {
        prop_assume!(mult < dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (fam, win) = random_family(&mut rng, dim, mult);
        let m = fam.member(eps);
        let contour = projection_of(&m, &win).unwrap();
        let direct = eigen_projection(&m, &win);
        prop_assert_eq!(contour.rank, mult);
        prop_assert!((&contour.matrix - &direct).norm() < 1e-9);
        prop_assert!(contour.idempotency < 1e-9);
    }

    #[test]
    fn polished_eigen_decomposition_reconstructs(seed in any::<u64>(), dim in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (fam, _) = random_family(&mut rng, dim.max(2), 1);
        let m = fam.member(1e-3);
        let e = symmetric_eigen(&m);
        let rebuilt = &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues) * e.eigenvectors.transpose();
        prop_assert!((rebuilt - &m).norm() < 1e-12 * (1.0 + m.norm()));
        let gram = e.eigenvectors.transpose() * &e.eigenvectors;
        prop_assert!((gram - DMatrix::identity(dim, dim)).norm() < 1e-12);
    }
}
