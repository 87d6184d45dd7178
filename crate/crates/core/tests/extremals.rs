use qcdeform::extremals::*;
use qcdeform::norms::{bergman_norm, bergman_norm_quadrature, hardy_norm};
use qcdeform::{BoundarySamples, Error, PowerSeries64, C64};

#[test]
fn kappa_coefficients_match_boundary_dft() {
    for n in [1usize, 2, 4] {
        for p in [1.5f64, 2.0, 6.0] {
            let k = series_kappa(n, p, 40).unwrap();
            let s = BoundarySamples::from_fn(0.995, 8192, |z| kappa_value(n, p, z)).unwrap();
            let dft = PowerSeries64::coeffs_from_boundary(&s, 40).unwrap();
            // aliases carry a factor 0.995^8192 ~ 1e-18
            assert!(k.max_abs_diff(&dft) < 1e-14, "n = {n}, p = {p}");
        }
    }
}

#[test]
fn kappa_evaluates_like_its_series() {
    let k = series_kappa(3, 2.5, 200).unwrap();
    for z in [C64::new(0.3, 0.1), C64::new(-0.5, 0.4), C64::new(0.0, -0.6)] {
        assert!((k.horner(z) - kappa_value(3, 2.5, z)).norm() < 1e-13);
    }
}

#[test]
fn bound_tends_to_one_and_two_over_e() {
    assert!((hsz_bound(1.0f64 + 1e-9).unwrap() - 1.0).abs() < 1e-9);
    assert!((hsz_bound(1e9f64).unwrap() - 2.0 / std::f64::consts::E).abs() < 1e-9);
    let mut prev = 1.0;
    for p in [1.5f64, 2.0, 3.0, 5.0, 10.0] {
        let b = hsz_bound(p).unwrap();
        assert!(b < prev);
        prev = b;
    }
}

#[test]
fn sweep_rows_are_ordered_and_reproducible() {
    let ps = [2.0, 3.0];
    let ns = [1, 4];
    let a = bound_sweep(10..16, &ps, &ns).unwrap();
    let b = bound_sweep(10..16, &ps, &ns).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 6 * 2 * 2);
    let keys: Vec<(u64, f64, usize)> = a.iter().map(|r| (r.seed, r.p, r.n)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    assert_eq!(keys, sorted);
    assert!(a.iter().all(|r| r.margin > 0.0));
}

#[test]
fn samples_have_unit_norm_and_no_zeros() {
    for seed in 0..20 {
        let style = SampleStyle::for_seed(seed);
        let f = sample_nonvanishing::<f64>(seed, 3.0, style).unwrap();
        assert!((hardy_norm(&f, 3.0, 1.0).unwrap().value - 1.0).abs() < 1e-12);
        assert!(f.is_nonvanishing(1.0).unwrap().nonvanishing);
    }
}

#[test]
fn parseval_tail_matches_closed_form() {
    for p in [2.0f64, 3.5, 9.0] {
        let coarse = parseval_comparison(p, 256).unwrap();
        let r = parseval_comparison(p, 512).unwrap();
        // the truncated tail increases to the closed-form one
        assert!(coarse.tail_sq < r.tail_sq);
        assert!(r.tail_sq <= r.full_tail_sq + 1e-12);
        assert!(r.full_tail_sq - r.tail_sq < 5e-3, "p = {p}");
        // Parseval on the truncated series
        assert!((r.hardy_2.powi(2) - r.c0_sq - r.c1_sq - r.tail_sq).abs() < 1e-12);
    }
}

#[test]
fn zero_free_polynomials_are_normalized() {
    for seed in 0..30 {
        let f = sample_zero_free_polynomial::<f64>(seed, 8).unwrap();
        assert!(f.degree() <= 8);
        assert!((bergman_norm(&f, 2.0).unwrap().value - 1.0).abs() < 1e-14);
        let quad = bergman_norm_quadrature(&f, 2.0).unwrap().value;
        assert!((quad - 1.0).abs() < 1e-10);
        assert!(f.is_nonvanishing(1.0).unwrap().nonvanishing);
    }
}

#[test]
fn bergman_perturbation_follows_identity() {
    for seed in 0..30 {
        let f = sample_zero_free_polynomial::<f64>(seed, 6).unwrap();
        for eps in [1e-3, 1e-2] {
            let r = bergman_perturb(&f, eps).unwrap();
            let want = bergman_perturb_identity(&f, eps);
            assert!((r.norm_after.powi(2) - want).abs() < 1e-13);
            assert!(r.zero_free);
        }
    }
}

#[test]
fn bergman_perturbation_rejects_zeros() {
    let f = PowerSeries64::from_real(&[0.5, 1.0]).unwrap();
    assert!(matches!(
        bergman_perturb(&f, 1e-3),
        Err(Error::Vanishing { .. })
    ));
}

#[test]
fn single_precision_kappa() {
    let k = series_kappa::<f32>(2, 3.0, 32).unwrap();
    assert!((k.coeff(2).norm() - hsz_bound(3.0f32).unwrap()).abs() < 1e-6);
    let h = hardy_norm(&k, 3.0f32, 0.9).unwrap().value;
    let h64 = hardy_norm(&series_kappa::<f64>(2, 3.0, 32).unwrap(), 3.0, 0.9)
        .unwrap()
        .value;
    assert!((f64::from(h) - h64).abs() < 1e-5);
}
