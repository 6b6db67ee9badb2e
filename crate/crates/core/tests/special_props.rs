use proptest::prelude::*;
use spectral_forge::numeric::C64;
use spectral_forge::special::*;
use std::f64::consts::PI;

fn wrapped(d: C64) -> C64 {
    // log Γ is continuous along its own branch; compare modulo 2πi
    C64::new(d.re, (d.im + PI).rem_euclid(2.0 * PI) - PI)
}

fn point() -> impl Strategy<Value = C64> {
    (0.05f64..40.0, -40.0f64..40.0).prop_map(|(re, im)| C64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn log_gamma_recurrence(z in point()) {
        let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        let scale = 1.0 + log_gamma(z + 1.0).unwrap().norm();
        prop_assert!(wrapped(d).norm() < 1e-12 * scale, "z={z} d={d}");
    }

    #[test]
    fn duplication(z in point()) {
        let g = gamma(2.0 * z);
        // only meaningful where Γ(2z) is representable
        prop_assume!(matches!(g, Ok(v) if v.is_finite() && v.norm() > 1e-280));
        let r = legendre_duplication_residual(z).unwrap();
        prop_assert!(r < 1e-10, "z={z} r={r}");
    }

    #[test]
    fn reflection_off_axis(x in -20.0f64..20.0, y in 0.1f64..5.0) {
        let z = C64::new(x, y);
        let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
        let rhs = PI / (PI * z).sin();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm(), "z={z}");
    }

    #[test]
    fn conjugate_symmetry(z in point()) {
        let a = log_gamma(z.conj()).unwrap();
        let b = log_gamma(z).unwrap().conj();
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bessel_moment_matches_quadrature(sigma in 2.0f64..3.5, tau in -2.0f64..2.0, t in 0.0f64..15.0) {
        let s = C64::new(sigma, tau);
        let sp = C64::new(0.5, t);
        let closed = bessel_moment(s, sp).unwrap();
        let quad = bessel_moment_quadrature(s, sp, &QuadratureSpec::default()).unwrap();
        prop_assert!((quad - closed).norm() <= 1e-8 * closed.norm(), "s={s} s_phi={sp}");
    }

    #[test]
    fn bessel_k_even_in_order(re in -3.0f64..3.0, im in -20.0f64..20.0, y in 0.01f64..30.0) {
        let nu = C64::new(re, im);
        let a = bessel_k(nu, y).unwrap();
        let b = bessel_k(-nu, y).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
    }
}

#[test]
fn both_quadrature_rules_agree_on_gaussian() {
    let f = |x: f64| C64::new((-x * x).exp(), 0.0);
    for scheme in [Scheme::GaussKronrod, Scheme::DoubleExponential] {
        let spec = QuadratureSpec::default().with_scheme(scheme);
        let v = integrate(f, Domain::RealLine, &spec).unwrap();
        assert!((v.value.re - PI.sqrt()).abs() < 1e-12, "{scheme:?}");
    }
}
