use num_integer::Integer;
use proptest::prelude::*;
use spectral_forge::arith::*;
use spectral_forge::hecke::*;
use spectral_forge::numeric::C64;

fn system(seed: u64, q: u64, pick: usize, t: f64, parity: i8) -> HeckeEigenSystem {
    let even: Vec<_> = enumerate_characters(q).unwrap().into_iter().filter(|c| c.is_even()).collect();
    let chi = &even[pick % even.len()];
    random_system(seed, q, chi, C64::new(0.5, t), parity).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hecke_relations(seed in any::<u64>(), q in 1u64..40, pick in 0usize..100, m in 1u64..300, n in 1u64..300) {
        let sys = system(seed, q, pick, 4.0, 1);
        prop_assert!(sys.verify_hecke_relation(m, n) < 1e-9, "q={q} m={m} n={n}");
    }

    #[test]
    fn coefficients_multiplicative_on_coprime(seed in any::<u64>(), q in 1u64..40, m in 1u64..400, n in 1u64..400) {
        prop_assume!(m.gcd(&n) == 1);
        let sys = system(seed, q, 0, 2.0, -1);
        let lhs = sys.coefficient_u(m * n);
        let rhs = sys.coefficient_u(m) * sys.coefficient_u(n);
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn unramified_seeds_are_tempered(seed in any::<u64>(), q in 1u64..40, pick in 0usize..100) {
        let sys = system(seed, q, pick, 1.0, 1);
        for p in primes_up_to(200) {
            let lam = sys.coefficient_u(p);
            if q % p == 0 {
                let expected = ramified_magnitude(p, q, sys.conductor());
                prop_assert!((lam.norm() - expected).abs() < 1e-12, "p={p}");
            } else {
                prop_assert!(lam.norm() <= 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn parity_sets_negative_coefficients(seed in any::<u64>(), n in 1i64..500) {
        let odd = system(seed, 6, 0, 3.0, -1);
        let a = odd.coefficient(-n).unwrap();
        let b = odd.coefficient(n).unwrap();
        prop_assert!((a + b).norm() < 1e-14);
    }
}

#[test]
fn generation_is_order_independent() {
    let chi = DirichletCharacter::principal(1).unwrap();
    let a = random_system(9, 1, &chi, C64::new(0.5, 2.0), 1).unwrap();
    let b = random_system(9, 1, &chi, C64::new(0.5, 2.0), 1).unwrap();
    let forward: Vec<C64> = (1..200).map(|n| a.coefficient_u(n)).collect();
    let backward: Vec<C64> = (1..200).rev().map(|n| b.coefficient_u(n)).collect();
    assert!(forward.iter().zip(backward.iter().rev()).all(|(x, y)| x == y));
}
