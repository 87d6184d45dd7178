//! The extremal family `kappa_{n,p}`, the coefficient bound `(2/e)^{1-1/p}`,
//! coefficient functionals, random zero-free samplers and the area-norm
//! perturbation of a zero-free polynomial.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{bergman_norm, hardy_norm};
use crate::scalar::{cis, cnt, cone, creal, czero, lit, to_f64, Real};
use crate::series::{PowerSeries, DEFAULT_RADIUS_HINT};

/// Truncation degree of the random samplers.
pub const SAMPLE_DEGREE: usize = 24;

/// Tolerance for matching a candidate against a rotated extremal.
pub const EXTREMAL_MATCH_TOL: f64 = 1e-5;

/// Margin below which a candidate is tested for extremality.
pub const EXTREMAL_MARGIN_TOL: f64 = 1e-6;

fn inv_p<T: Real>(p: T) -> T {
    if p.is_infinite() {
        T::zero()
    } else {
        T::one() / p
    }
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if p.is_nan() || p <= T::one() {
        return Err(Error::Domain(format!("need p > 1, got {}", to_f64(p))));
    }
    Ok(())
}

/// `(2/e)^{1 - 1/p}`; `p = inf` gives `2/e`.
pub fn hsz_bound<T: Real>(p: T) -> Result<T> {
    check_p(p)?;
    Ok((lit::<T>(2.0) / T::E()).powf(T::one() - inv_p(p)))
}

/// Radius on which a truncated `kappa` is still checked for zeros.
///
/// Past it the truncation error near `z^n = -1`, where `kappa` is
/// exponentially small, produces spurious zeros.
pub fn kappa_radius_hint<T: Real>(degree: usize) -> T {
    let r = lit::<T>(10.0).powf(-lit::<T>(10.0) / cnt(degree.max(1)));
    r.min(lit(DEFAULT_RADIUS_HINT))
}

/// `[(1 + z^n)^2 / 2]^{1/p} exp((1 - 1/p)(z^n - 1)/(z^n + 1))` truncated at `degree`.
pub fn series_kappa<T: Real>(n: usize, p: T, degree: usize) -> Result<PowerSeries<T>> {
    check_p(p)?;
    if n == 0 {
        return Err(Error::Domain("kappa needs n >= 1".into()));
    }
    if degree < n {
        return Err(Error::Domain(format!(
            "truncation degree {degree} below n = {n}"
        )));
    }
    let inner = degree / n;
    let half = lit::<T>(0.5);
    let a = PowerSeries::new(vec![creal(half), cone(), creal(half)])?.resized(inner);
    let a_pow = a.principal_power(inv_p(p))?;
    let one_plus = PowerSeries::new(vec![cone(), cone()])?.resized(inner);
    let minus_one = PowerSeries::new(vec![-cone::<T>(), cone()])?.resized(inner);
    let ratio = &minus_one * &one_plus.reciprocal()?;
    let b = ratio.scale_real(T::one() - inv_p(p)).exp();
    let k = (&a_pow * &b).compose_power(n)?.resized(degree);
    Ok(k.with_radius_hint(kappa_radius_hint(degree)))
}

/// Closed form of `kappa_{n,p}(z)` for `|z| < 1`.
pub fn kappa_value<T: Real>(n: usize, p: T, z: Complex<T>) -> Complex<T> {
    let w = z.powu(n as u32);
    let one = cone::<T>();
    let a = ((one + w) * (one + w) * lit::<T>(0.5)).powf(inv_p(p));
    let b = ((w - one) / (w + one) * (T::one() - inv_p(p))).exp();
    a * b
}

/// `J_n(f) = c_n`.
pub fn functional_j<T: Real>(f: &PowerSeries<T>, n: usize) -> Result<Complex<T>> {
    if n > f.degree() {
        return Err(Error::Domain(format!(
            "index {n} beyond truncation degree {}",
            f.degree()
        )));
    }
    Ok(f.coeff(n))
}

/// `max_{m=1..n} |c_n(f(z^m))|`, evaluated over divisors `m | n` as `|c_{n/m}(f)|`.
pub fn functional_i<T: Real>(f: &PowerSeries<T>, n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::Domain("I_n needs n >= 2".into()));
    }
    functional_j(f, n)?;
    Ok((1..=n)
        .filter(|m| n.is_multiple_of(*m))
        .map(|m| f.coeff(n / m).norm())
        .fold(T::zero(), T::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub functional_value: f64,
    pub bound: f64,
    pub margin: f64,
    pub achiever_is_extremal: bool,
}

/// Preconditions enforced by [`verify_bound_with`].
#[derive(Clone, Copy, Debug)]
pub struct BoundPolicy<T> {
    /// Allowed excess of the `H^p` norm over 1.
    pub norm_tol: T,
    /// Radius of the zero check; `None` uses the series' own radius hint.
    pub radius: Option<T>,
}

impl<T: Real> Default for BoundPolicy<T> {
    fn default() -> Self {
        Self {
            norm_tol: lit(1e-9),
            radius: None,
        }
    }
}

/// Checks `|c_n| <= (2/e)^{1-1/p}` for a zero-free `f` in the closed unit ball of `H^p`.
pub fn verify_bound<T: Real>(f: &PowerSeries<T>, n: usize, p: T) -> Result<BoundReport> {
    verify_bound_with(f, n, p, &BoundPolicy::default())
}

pub fn verify_bound_with<T: Real>(
    f: &PowerSeries<T>,
    n: usize,
    p: T,
    policy: &BoundPolicy<T>,
) -> Result<BoundReport> {
    let bound = hsz_bound(p)?;
    let cn = functional_j(f, n)?;
    let radius = policy.radius.unwrap_or_else(|| f.radius_hint());
    let zeros = f.is_nonvanishing(radius)?;
    if !zeros.nonvanishing {
        return Err(Error::Vanishing {
            radius: to_f64(radius),
            winding: zeros.winding,
        });
    }
    let norm = hardy_norm(f, p, T::one())?.value;
    if norm > T::one() + policy.norm_tol {
        return Err(Error::NormExcess {
            norm: to_f64(norm),
            tol: to_f64(policy.norm_tol),
        });
    }
    let margin = bound - cn.norm();
    let achiever_is_extremal = margin < lit(EXTREMAL_MARGIN_TOL) && matches_rotated_kappa(f, n, p)?;
    Ok(BoundReport {
        functional_value: to_f64(cn.norm()),
        bound: to_f64(bound),
        margin: to_f64(margin),
        achiever_is_extremal,
    })
}

/// Fits `eps_2` from `c_0` and `eps_1^n` from `c_n`, then compares every coefficient
/// with `eps_2 kappa_{n,p}(eps_1 z)`.
fn matches_rotated_kappa<T: Real>(f: &PowerSeries<T>, n: usize, p: T) -> Result<bool> {
    let c0 = f.coeff(0);
    if c0.norm() == T::zero() {
        return Ok(false);
    }
    let kappa = series_kappa(n, p, f.degree())?;
    let eps2 = c0 / c0.norm();
    let u = f.coeff(n) / (eps2 * kappa.coeff(n));
    if (u.norm() - T::one()).abs() > lit(EXTREMAL_MATCH_TOL) {
        return Ok(false);
    }
    let u = u / u.norm();
    let tol = lit::<T>(EXTREMAL_MATCH_TOL);
    let mut rot = cone::<T>();
    for k in 0..=f.degree() {
        let want = if k % n == 0 {
            if k > 0 {
                rot = rot * u;
            }
            eps2 * rot * kappa.coeff(k)
        } else {
            czero()
        };
        if (f.coeff(k) - want).norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The `n = 1` case of [`verify_bound`].
pub fn brown_check<T: Real>(f: &PowerSeries<T>, p: T) -> Result<BoundReport> {
    verify_bound(f, 1, p)
}

/// `eps_2 f(eps_1 z)` for unimodular rotations.
pub fn rotate<T: Real>(f: &PowerSeries<T>, pre: Complex<T>, post: Complex<T>) -> PowerSeries<T> {
    let mut rot = cone::<T>();
    let c = f
        .coeffs()
        .iter()
        .map(|&a| {
            let v = post * rot * a;
            rot = rot * pre;
            v
        })
        .collect();
    PowerSeries::from_vec_unchecked(c, f.radius_hint())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub p: f64,
    pub degree: usize,
    pub c0_sq: f64,
    pub c1_sq: f64,
    /// `sum_{n=2}^{N} |c_n|^2` of the truncated series.
    pub tail_sq: f64,
    /// `tail_sq < 0.5 < c1_sq`.
    pub inequality_holds: bool,
    /// Closed-form `||kappa_{1,p}||_{H^2}^2`.
    pub h2_norm_sq: f64,
    /// `h2_norm_sq - c0_sq - c1_sq`: the untruncated tail.
    pub full_tail_sq: f64,
    pub hardy_2: f64,
    pub hardy_p: f64,
    pub h2_exceeds_hp: bool,
}

/// `||kappa_{1,p}||_{H^2}^2 = mean of (1 + cos t)^{2/p} = 2^s Gamma(s + 1/2) / (sqrt(pi) Gamma(s + 1))`, `s = 2/p`.
pub fn kappa_h2_norm_sq(p: f64) -> f64 {
    let s = if p.is_infinite() { 0.0 } else { 2.0 / p };
    2f64.powf(s) * libm::tgamma(s + 0.5) / (std::f64::consts::PI.sqrt() * libm::tgamma(s + 1.0))
}

/// Compares `|c_1(kappa_{1,p})|^2` with the rest of the Parseval sum.
pub fn parseval_comparison<T: Real>(p: T, degree: usize) -> Result<ParsevalReport> {
    let k = series_kappa(1, p, degree.max(2))?;
    let c0_sq = to_f64(k.coeff(0).norm_sqr());
    let c1_sq = to_f64(k.coeff(1).norm_sqr());
    let tail_sq = (2..=k.degree())
        .map(|n| to_f64(k.coeff(n).norm_sqr()))
        .sum::<f64>();
    let h2_norm_sq = kappa_h2_norm_sq(to_f64(p));
    let hardy_2 = to_f64(hardy_norm(&k, lit(2.0), T::one())?.value);
    let hardy_p = to_f64(hardy_norm(&k, p, T::one())?.value);
    Ok(ParsevalReport {
        p: to_f64(p),
        degree: k.degree(),
        c0_sq,
        c1_sq,
        tail_sq,
        inequality_holds: tail_sq < 0.5 && 0.5 < c1_sq,
        h2_norm_sq,
        full_tail_sq: h2_norm_sq - c0_sq - c1_sq,
        hardy_2,
        hardy_p,
        h2_exceeds_hp: hardy_2 > hardy_p,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStyle {
    /// `exp(g)` for a random polynomial `g`.
    ExpOfSeries,
    /// `c prod (1 - z / z_k)` with every `|z_k| > 1`.
    ZeroFreePolynomial,
}

impl SampleStyle {
    pub fn for_seed(seed: u64) -> Self {
        if seed.is_multiple_of(2) {
            SampleStyle::ExpOfSeries
        } else {
            SampleStyle::ZeroFreePolynomial
        }
    }
}

fn disk_point<T: Real>(rng: &mut ChaCha8Rng, radius: f64) -> Complex<T> {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = std::f64::consts::TAU * rng.gen::<f64>();
    cis(lit::<T>(t)) * lit::<T>(r)
}

fn draw_exp<T: Real>(rng: &mut ChaCha8Rng) -> Result<PowerSeries<T>> {
    let d = rng.gen_range(1..=6);
    let mut g = vec![czero::<T>(); SAMPLE_DEGREE + 1];
    g[0] = disk_point(rng, 1.0);
    for (k, gk) in g.iter_mut().enumerate().take(d + 1).skip(1) {
        *gk = disk_point(rng, 1.0 / k as f64);
    }
    Ok(PowerSeries::new(g)?.exp())
}

fn draw_polynomial<T: Real>(rng: &mut ChaCha8Rng) -> Result<PowerSeries<T>> {
    let d = rng.gen_range(1..=6);
    let mut f = PowerSeries::constant(cis(lit::<T>(std::f64::consts::TAU * rng.gen::<f64>())))
        .resized(SAMPLE_DEGREE);
    for _ in 0..d {
        let modulus = 1.0 + rng.gen_range(0.02..3.0);
        let root = cis(lit::<T>(std::f64::consts::TAU * rng.gen::<f64>())) * lit::<T>(modulus);
        let factor = PowerSeries::new(vec![cone(), -root.inv()])?.resized(SAMPLE_DEGREE);
        f = &f * &factor;
    }
    Ok(f)
}

/// Deterministic zero-free series rescaled to unit `H^p` norm.
///
/// Draws whose truncation picks up a zero in the closed disk are rejected and
/// redrawn from the same stream.
pub fn sample_nonvanishing<T: Real>(seed: u64, p: T, style: SampleStyle) -> Result<PowerSeries<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let f = match style {
            SampleStyle::ExpOfSeries => draw_exp::<T>(&mut rng)?,
            SampleStyle::ZeroFreePolynomial => draw_polynomial::<T>(&mut rng)?,
        };
        match f.is_nonvanishing(T::one()) {
            Ok(r) if r.nonvanishing => {}
            _ => continue,
        }
        let norm = hardy_norm(&f, p, T::one())?.value;
        return Ok(f.scale_real(T::one() / norm));
    }
    Err(Error::NonConvergence {
        iterations: 64,
        residual: f64::NAN,
        trace: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub p: f64,
    pub n: usize,
    pub c_n_abs: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Runs [`verify_bound`] over `seeds x ps x ns`; the style alternates with seed parity.
/// Rows come back in `(seed, p, n)` order regardless of thread count.
pub fn bound_sweep(seeds: std::ops::Range<u64>, ps: &[f64], ns: &[usize]) -> Result<Vec<SweepRow>> {
    let jobs: Vec<(u64, f64)> = seeds
        .flat_map(|s| ps.iter().map(move |&p| (s, p)))
        .collect();
    let rows: Result<Vec<Vec<SweepRow>>> = jobs
        .par_iter()
        .map(|&(seed, p)| {
            let f = sample_nonvanishing::<f64>(seed, p, SampleStyle::for_seed(seed))?;
            ns.iter()
                .map(|&n| {
                    let r = verify_bound(&f, n, p)?;
                    Ok(SweepRow {
                        seed,
                        p,
                        n,
                        c_n_abs: r.functional_value,
                        bound: r.bound,
                        margin: r.margin,
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BergmanPerturbation<T> {
    pub p: PowerSeries<T>,
    pub norm_before: T,
    pub norm_after: T,
    pub zero_free: bool,
}

/// Lower bound for `min |f|` on `|z| = r`: grid minimum less a Lipschitz correction.
pub fn circle_min_lower_bound<T: Real>(f: &PowerSeries<T>, r: T) -> T {
    let m = (16 * (f.degree() + 1)).max(4096).next_power_of_two();
    let grid_min = f
        .sample_circle(r, m)
        .values
        .iter()
        .fold(T::infinity(), |a, v| a.min(v.norm()));
    let mut lip = T::zero();
    let mut rk = T::one();
    for k in 1..=f.degree() {
        lip = lip + cnt::<T>(k) * f.coeff(k).norm() * rk;
        rk = rk * r;
    }
    grid_min - lip * r * T::PI() / cnt(m)
}

/// `(1 - eps) c_0 + c_1 z + ... + c_N z^N + eps z^{N+1}`, with a Rouche check that the
/// perturbation cannot create zeros.
pub fn bergman_perturb<T: Real>(p_n: &PowerSeries<T>, eps: T) -> Result<BergmanPerturbation<T>> {
    if p_n.is_zero() {
        return Err(Error::ZeroSeries);
    }
    let c0 = p_n.coeff(0);
    if c0.norm() == T::zero() {
        return Err(Error::DegenerateLeading);
    }
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(Error::Domain("need 0 <= eps < 1".into()));
    }
    let zeros = p_n.is_nonvanishing(T::one())?;
    if !zeros.nonvanishing {
        return Err(Error::Vanishing {
            radius: 1.0,
            winding: zeros.winding,
        });
    }
    let norm_before = bergman_norm(p_n, lit(2.0))?.value;
    if norm_before > T::one() + lit(1e-12) {
        return Err(Error::NormExcess {
            norm: to_f64(norm_before),
            tol: 1e-12,
        });
    }
    let min_modulus = circle_min_lower_bound(p_n, T::one());
    let perturbation = eps * (c0.norm() + T::one());
    if perturbation >= min_modulus {
        return Err(Error::RoucheMargin {
            perturbation: to_f64(perturbation),
            minimum: to_f64(min_modulus),
        });
    }
    let mut c = p_n.coeffs().to_vec();
    c[0] = c0 * (T::one() - eps);
    c.push(creal(eps));
    let p = PowerSeries::from_vec_unchecked(c, p_n.radius_hint());
    let norm_after = bergman_norm(&p, lit(2.0))?.value;
    let zero_free = p.is_nonvanishing(T::one())?.nonvanishing;
    Ok(BergmanPerturbation {
        p,
        norm_before,
        norm_after,
        zero_free,
    })
}

/// Zero-free polynomial of degree `1..=max_degree` with unit `A_2` norm; roots lie in
/// `1.25 <= |z| <= 4`.
pub fn sample_zero_free_polynomial<T: Real>(
    seed: u64,
    max_degree: usize,
) -> Result<PowerSeries<T>> {
    if max_degree == 0 {
        return Err(Error::Domain("need max_degree >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=max_degree);
    let mut f =
        PowerSeries::constant(cis(lit::<T>(std::f64::consts::TAU * rng.gen::<f64>()))).resized(d);
    for _ in 0..d {
        let modulus = rng.gen_range(1.25..4.0);
        let root = cis(lit::<T>(std::f64::consts::TAU * rng.gen::<f64>())) * lit::<T>(modulus);
        let factor = PowerSeries::new(vec![cone(), -root.inv()])?.resized(d);
        f = &f * &factor;
    }
    let norm = bergman_norm(&f, lit(2.0))?.value;
    Ok(f.scale_real(T::one() / norm))
}

/// `norm_before^2 - eps (2 - eps) |c_0|^2 + eps^2 / (N + 2)`.
pub fn bergman_perturb_identity<T: Real>(p_n: &PowerSeries<T>, eps: T) -> T {
    let before = bergman_norm(p_n, lit(2.0)).expect("p = 2").value;
    before * before - eps * (lit::<T>(2.0) - eps) * p_n.coeff(0).norm_sqr()
        + eps * eps / cnt(p_n.degree() + 2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpennessReport {
    /// Certified lower bound for `min |f|` on `|z| <= 0.999`.
    pub delta: f64,
    pub perturbation_h2: f64,
    /// `sqrt(deg + 1) * ||Delta||_{H^2}`, an upper bound for `sup |Delta|`.
    pub perturbation_sup_bound: f64,
    pub still_nonvanishing: bool,
}

/// Degree of the random perturbations in [`openness_probe`]. Their sup norm is at
/// most `3 ||Delta||_{H^2}`, so `||Delta||_{H^2} = delta / 4` stays below `delta`.
pub const OPENNESS_PERTURBATION_DEGREE: usize = 8;

/// Adds a random perturbation of `H^2` size `delta / 4` and rechecks for zeros.
pub fn openness_probe<T: Real>(f: &PowerSeries<T>, seed: u64) -> Result<OpennessReport> {
    let r = lit::<T>(DEFAULT_RADIUS_HINT);
    let zeros = f.is_nonvanishing(r)?;
    if !zeros.nonvanishing {
        return Err(Error::Vanishing {
            radius: DEFAULT_RADIUS_HINT,
            winding: zeros.winding,
        });
    }
    let delta = circle_min_lower_bound(f, r);
    if delta <= T::zero() {
        return Err(Error::Precondition(
            "minimum modulus too small to certify".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = OPENNESS_PERTURBATION_DEGREE;
    let mut c: Vec<Complex<T>> = (0..=d).map(|_| disk_point(&mut rng, 1.0)).collect();
    let energy = c.iter().fold(T::zero(), |a, v| a + v.norm_sqr()).sqrt();
    let target = delta / lit(4.0);
    for v in c.iter_mut() {
        *v = *v * (target / energy);
    }
    let delta_series = PowerSeries::new(c)?.resized(f.degree().max(d));
    let g = &f.resized(f.degree().max(d)) + &delta_series;
    let g = g.with_radius_hint(r);
    let still_nonvanishing = matches!(g.is_nonvanishing(r), Ok(z) if z.nonvanishing);
    Ok(OpennessReport {
        delta: to_f64(delta),
        perturbation_h2: to_f64(target),
        perturbation_sup_bound: to_f64(target * cnt::<T>(d + 1).sqrt()),
        still_nonvanishing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn bound_values() {
        assert!((hsz_bound(2.0f64).unwrap() - 0.857_763_884_960_707).abs() < 1e-12);
        assert!((hsz_bound(f64::INFINITY).unwrap() - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((hsz_bound(1.0f64 + 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(hsz_bound(1.0).is_err());
    }

    #[test]
    fn kappa_constant_term() {
        for p in [1.5, 2.0, 4.0, 9.0] {
            let k = series_kappa(3, p, 30).unwrap();
            let want = 2f64.powf(-1.0 / p) * (-(1.0 - 1.0 / p)).exp();
            assert!((k.coeff(0) - C::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn kappa_support_and_bound() {
        for n in 1..=5 {
            let k = series_kappa(n, 2.5, 60).unwrap();
            for j in 0..=60 {
                if j % n != 0 {
                    assert_eq!(k.coeff(j), C::new(0.0, 0.0));
                }
            }
            assert!((k.coeff(n).norm() - hsz_bound(2.5).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_two_is_composed_kappa_one() {
        let k1 = series_kappa(1, 3.0, 20).unwrap();
        let k2 = series_kappa(2, 3.0, 40).unwrap();
        assert!(k1.compose_power(2).unwrap().max_abs_diff(&k2) < 1e-15);
    }

    #[test]
    fn kappa_rejects_bad_input() {
        assert!(series_kappa(1, 1.0, 8).is_err());
        assert!(series_kappa(0, 2.0, 8).is_err());
        assert!(series_kappa(4, 2.0, 3).is_err());
    }

    #[test]
    fn functionals() {
        let f = PowerSeries::from_real(&[1.0, 2.0, -3.0, 0.5, 0.25]).unwrap();
        assert_eq!(functional_j(&f, 1).unwrap(), C::new(2.0, 0.0));
        assert!(functional_j(&f, 5).is_err());
        assert_eq!(functional_i(&f, 4).unwrap(), 3.0);
        assert_eq!(
            functional_i(&PowerSeries::from_real(&[0.7, 0.0, 0.0]).unwrap(), 2).unwrap(),
            0.0
        );
        assert!(functional_i(&f, 1).is_err());
    }

    #[test]
    fn functional_i_matches_literal_composition() {
        let f = PowerSeries::new(
            (0..=12)
                .map(|k| C::new((k as f64).sin(), (k as f64 * 0.3).cos()))
                .collect(),
        )
        .unwrap();
        for n in 2..=12 {
            let direct = (1..=n)
                .map(|m| f.compose_power(m).unwrap().coeff(n).norm())
                .fold(0.0, f64::max);
            assert_eq!(functional_i(&f, n).unwrap(), direct);
        }
    }

    #[test]
    fn kappa_is_extremal() {
        let k = series_kappa(2, 2.0, 64).unwrap();
        let r = verify_bound(&k, 2, 2.0).unwrap();
        assert!(r.margin.abs() < 1e-12);
        assert!(r.achiever_is_extremal);
    }

    #[test]
    fn rotated_kappa_detected() {
        let k = series_kappa(1, 3.0, 64).unwrap();
        let rotated = rotate(&k, C::from_polar(1.0, 0.7), C::from_polar(1.0, -2.1));
        let policy = BoundPolicy {
            norm_tol: 2e-3,
            radius: None,
        };
        let r = verify_bound_with(&rotated, 1, 3.0, &policy).unwrap();
        assert!(r.margin.abs() < 1e-12);
        assert!(r.achiever_is_extremal);
        // Same |c_1| but a different series.
        let mut c = rotated.coeffs().to_vec();
        c[3] += C::new(1e-3, 0.0);
        let other = PowerSeries::new(c)
            .unwrap()
            .with_radius_hint(rotated.radius_hint());
        let r = verify_bound_with(&other, 1, 3.0, &policy).unwrap();
        assert!(!r.achiever_is_extremal);
    }

    #[test]
    fn constant_margin_is_bound() {
        let f = PowerSeries::constant(C::new(0.6, 0.0)).resized(4);
        let r = verify_bound(&f, 3, 2.0).unwrap();
        assert_eq!(r.margin, r.bound);
        assert!(!r.achiever_is_extremal);
    }

    #[test]
    fn distinct_precondition_errors() {
        let vanishing = PowerSeries::from_real(&[0.1, 0.5]).unwrap();
        assert!(matches!(
            verify_bound(&vanishing, 1, 2.0),
            Err(Error::Vanishing { winding: 1, .. })
        ));
        let big = PowerSeries::from_real(&[2.0, 0.1]).unwrap();
        assert!(matches!(
            verify_bound(&big, 1, 2.0),
            Err(Error::NormExcess { .. })
        ));
    }

    #[test]
    fn parseval_values() {
        let r = parseval_comparison(2.0, 128).unwrap();
        assert!((r.c1_sq - 2.0 / std::f64::consts::E).abs() < 1e-12);
        assert!(r.inequality_holds);
        let r = parseval_comparison(f64::INFINITY, 128).unwrap();
        assert!((r.c1_sq - 0.541_341_132_946_451).abs() < 1e-12);
        assert!(r.inequality_holds);
    }

    #[test]
    fn h2_norm_formula_against_quadrature() {
        // (1 + cos t)^{2/p} is smooth for p = 1, 2/3 ... check integer exponents exactly.
        assert!((kappa_h2_norm_sq(2.0) - 1.0).abs() < 1e-14);
        assert!((kappa_h2_norm_sq(1.0) - 1.5).abs() < 1e-14);
        assert!((kappa_h2_norm_sq(f64::INFINITY) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn samplers_are_deterministic_and_normalized() {
        for seed in 0..20u64 {
            for style in [SampleStyle::ExpOfSeries, SampleStyle::ZeroFreePolynomial] {
                let a = sample_nonvanishing::<f64>(seed, 2.5, style).unwrap();
                let b = sample_nonvanishing::<f64>(seed, 2.5, style).unwrap();
                assert_eq!(a, b);
                assert!(a.is_nonvanishing(0.999).unwrap().nonvanishing);
                let h = hardy_norm(&a, 2.5, 1.0).unwrap().value;
                assert!((h - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bergman_perturb_example() {
        let one = PowerSeries::constant(C::new(1.0, 0.0));
        let r = bergman_perturb(&one, 0.1).unwrap();
        assert!((r.p.coeff(0) - C::new(0.9, 0.0)).norm() < 1e-15);
        assert!((r.p.coeff(1) - C::new(0.1, 0.0)).norm() < 1e-15);
        assert!((r.norm_after * r.norm_after - 0.815).abs() < 1e-15);
        assert!(r.zero_free);
        let same = bergman_perturb(&one, 0.0).unwrap();
        assert_eq!(same.norm_after, same.norm_before);
    }

    #[test]
    fn bergman_perturb_rouche_guard() {
        let one = PowerSeries::constant(C::new(1.0, 0.0));
        assert!(matches!(
            bergman_perturb(&one, 0.6),
            Err(Error::RoucheMargin { .. })
        ));
    }
}
