use proptest::prelude::*;

use qcdeform::config::{Command, ExperimentConfig, OutputFormat};
use qcdeform::extremals::{hsz_bound, sample_nonvanishing, verify_bound, SampleStyle};
use qcdeform::integral::{cauchy_t, AnnulusSpec, LaurentDensity, Monomial};
use qcdeform::norms::{mean_function_profile, profile_diagnostics};
use qcdeform::schwarzian::{
    a_from_b, invert_map, schwarzian_norm, schwarzian_of, solve_schwarzian,
};
use qcdeform::{PowerSeries64, C64};

fn complex(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(a, b)| C64::new(a, b))
}

/// Zero-free series: `|c_0| > 0.57` dominates `sum_{k>0} |c_k| < 0.48`.
fn decaying_series(degree: usize) -> impl Strategy<Value = PowerSeries64> {
    prop::collection::vec(complex(1.0), degree + 1).prop_map(|mut c| {
        c[0] = C64::new(1.0, 0.0) + c[0] * 0.3;
        for (k, v) in c.iter_mut().enumerate().skip(1) {
            *v *= 0.25f64.powi(k as i32);
        }
        PowerSeries64::new(c).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn product_is_associative(a in decaying_series(16), b in decaying_series(16), c in decaying_series(16)) {
        let l = &(&a * &b) * &c;
        let r = &a * &(&b * &c);
        prop_assert!(l.max_abs_diff(&r) < 1e-12);
    }

    #[test]
    fn reciprocal_inverts(f in decaying_series(20)) {
        let one = &f * &f.reciprocal().unwrap();
        prop_assert!(one.max_abs_diff(&PowerSeries64::constant(C64::new(1.0, 0.0)).resized(20)) < 1e-12);
    }

    #[test]
    fn exp_undoes_log(f in decaying_series(20)) {
        let back = f.log_series().unwrap().exp();
        prop_assert!(back.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn mean_function_grows_log_convexly(f in decaying_series(10), p in 1.0f64..6.0) {
        let radii: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
        let values = mean_function_profile(&f, p, &radii).unwrap();
        prop_assert!(profile_diagnostics(&radii, &values).passes(1e-12));
    }

    #[test]
    fn seeded_samples_respect_the_bound(seed in 0u64..5000, p in 2.0f64..8.0, n in 1usize..6) {
        let f = sample_nonvanishing::<f64>(seed, p, SampleStyle::for_seed(seed)).unwrap();
        let r = verify_bound(&f, n, p).unwrap();
        prop_assert!(r.margin >= -1e-9);
        prop_assert!((r.bound - hsz_bound(p).unwrap()).abs() == 0.0);
    }

    #[test]
    fn cauchy_transform_is_linear(
        a in complex(1.0),
        b in complex(1.0),
        r in 1.5f64..6.0,
        t in 0.0f64..std::f64::consts::TAU,
        s in 0.05f64..0.95,
    ) {
        let ann = AnnulusSpec::new(C64::new(0.2, -0.4), r).unwrap();
        let x = LaurentDensity::monomial(ann, Monomial::new(1, -2, 0), C64::new(1.0, 0.0));
        let y = LaurentDensity::monomial(ann, Monomial::new(0, -3, 1), C64::new(0.0, 1.0));
        let sum = x.scale(a).try_add(&y.scale(b)).unwrap();
        // a point strictly inside the annulus, away from both bands
        let w = ann.c0 + C64::from_polar(r + s, t);
        let lhs = cauchy_t(&sum, w).unwrap();
        let rhs = a * cauchy_t(&x, w).unwrap() + b * cauchy_t(&y, w).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn exterior_recursion_recovers_coefficients(
        theta in 0.0f64..std::f64::consts::TAU,
        tail in prop::collection::vec(complex(1.0), 24),
    ) {
        let mut c = vec![C64::new(0.0, 0.0), C64::from_polar(1.0, theta)];
        for (k, v) in tail.into_iter().enumerate() {
            c.push(v * 0.3f64.powi(k as i32 + 1));
        }
        let w = PowerSeries64::new(c).unwrap();
        let ext = invert_map(&w).unwrap();
        for n in 1..=10 {
            let a = a_from_b(&ext.b, theta, n).unwrap();
            prop_assert!((a - w.coeff(n)).norm() < 1e-12, "n = {}", n);
        }
    }

    #[test]
    fn schwarzian_round_trip(coeffs in prop::collection::vec(complex(1.0), 13), theta in 0.0f64..6.3, size in 0.01f64..0.19) {
        let phi = PowerSeries64::new(coeffs).unwrap();
        prop_assume!(schwarzian_norm(&phi) > 0.0);
        let phi = phi.scale_real(size / schwarzian_norm(&phi));
        let w = solve_schwarzian(&phi, theta).unwrap();
        prop_assert!((w.coeff(1) - C64::from_polar(1.0, theta)).norm() < 1e-15);
        prop_assert!(w.coeff(2).norm() < 1e-15);
        prop_assert!(schwarzian_of(&w).unwrap().max_abs_diff(&phi) < 1e-12);
    }

    #[test]
    fn config_round_trips(
        p in prop::collection::vec(1.0001f64..64.0, 1..6),
        n in prop::collection::vec(1usize..40, 1..4),
        seed in any::<u64>(),
        eps in 0.0f64..1.0,
        degree in 0usize..4096,
        r in prop::option::of(1.5f64..100.0),
        csv in any::<bool>(),
    ) {
        let mut c = ExperimentConfig::new(Command::Deform);
        c.p = p;
        c.n = n;
        c.seed = seed;
        c.eps = eps;
        c.degree = degree;
        c.annulus_r = r;
        c.format = if csv { OutputFormat::Csv } else { OutputFormat::Json };
        c.validate().unwrap();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(back, c);
    }
}
