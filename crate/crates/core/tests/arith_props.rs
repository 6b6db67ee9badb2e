use num_integer::Integer;
use proptest::prelude::*;
use spectral_forge::arith::*;
use spectral_forge::numeric::C64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sigma_and_totient_are_multiplicative(m in 1u64..5000, n in 1u64..5000) {
        prop_assume!(m.gcd(&n) == 1);
        prop_assert_eq!(sigma1(m * n), sigma1(m) * sigma1(n));
        prop_assert_eq!(totient(m * n), totient(m) * totient(n));
    }

    #[test]
    fn totient_sums_over_divisors(n in 1u64..20_000) {
        prop_assert_eq!(divisors(n).iter().map(|&d| totient(d)).sum::<u64>(), n);
    }

    #[test]
    fn factorization_recomposes(n in 1u64..1_000_000_000) {
        let back: u64 = factorize(n).iter().map(|&(p, e)| p.pow(e)).product();
        prop_assert_eq!(back, n);
        prop_assert!(factorize(n).iter().all(|&(p, _)| is_prime(p)));
    }

    #[test]
    fn characters_are_completely_multiplicative(q in 2u64..60, a in 0i64..500, b in -500i64..500, pick in 0usize..1000) {
        let chars = enumerate_characters(q).unwrap();
        let chi = &chars[pick % chars.len()];
        let lhs = chi.value(a * b);
        let rhs = chi.value(a) * chi.value(b);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn conductor_decomposition_lifts_back(q in 2u64..120, pick in 0usize..1000) {
        let chars = enumerate_characters(q).unwrap();
        let chi = &chars[pick % chars.len()];
        let (prim, _) = conductor_decompose(chi);
        prop_assert!(prim.is_primitive());
        prop_assert_eq!(prim.modulus(), chi.conductor());
        let lifted = prim.lift(q);
        for n in 0..q {
            prop_assert!((lifted.value_u(n) - chi.value_u(n)).norm() < 1e-12);
        }
    }
}

#[test]
fn character_group_orthogonality() {
    for q in 2..=40u64 {
        let chars = enumerate_characters(q).unwrap();
        assert_eq!(chars.len() as u64, totient(q));
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let s: C64 = (0..q).map(|n| a.value_u(n) * b.value_u(n).conj()).sum();
                let expected = if i == j { totient(q) as f64 } else { 0.0 };
                assert!((s - expected).norm() < 1e-9, "q={q} i={i} j={j}");
            }
        }
    }
}

#[test]
fn primitive_gauss_sums_have_modulus_sqrt_q() {
    for r in 3..=60u64 {
        for psi in primitive_characters(r).unwrap() {
            let g = gauss_sum(&psi).norm();
            assert!((g - (r as f64).sqrt()).abs() < 1e-10, "r={r}");
        }
    }
}
