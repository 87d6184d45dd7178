//! Cauchy transform, Beurling transform and the area pairing on monomial densities.
//!
//! Conventions, with `u = zeta - c0`, `v = w - c0`:
//!
//! * `T rho(w) = -(1/pi) ∬_{G_R} rho(zeta) / (zeta - w) dxi deta`, so `∂̄ T rho = rho`.
//! * `Pi rho = ∂_w T rho`.
//! * `<nu, phi> = -(1/pi) ∬_{G_R} nu phi dxi deta`.
//! * `phi_k = u^{-k-1}` and `<conj(phi_k), phi_k> = -r_k^2`.
//!
//! For a monomial `u^a conj(u)^b (ln|u|)^l` of frequency `m = a - b` the angular
//! integral in `T` keeps only one Laurent term of the kernel, which leaves the
//! radial integral of `r^{2b+1} (ln r)^l`. Inside the disk `|v| < R` the
//! transform is the polynomial `sum_k t_k v^k` with `t_k = <rho, phi_k>`; outside
//! `|v| > R + 1` it is a Laurent tail in `v^{-1}`.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cpowi, czero, lit, to_f64, Real};

use super::density::{
    eval_radial, radial_antiderivative, radial_integral, AnnulusSpec, LaurentDensity, Monomial,
};

/// Half-width of the excluded band around both boundary circles.
pub const BOUNDARY_BAND: f64 = 1e-8;

fn radial_jump<T: Real>(m: &Monomial, annulus: &AnnulusSpec<T>) -> T {
    radial_integral(2 * m.b + 1, m.l, annulus.inner(), annulus.outer())
}

/// `T rho` on the open annulus as a monomial density.
pub fn cauchy_t_density<T: Real>(rho: &LaurentDensity<T>) -> LaurentDensity<T> {
    let ann = rho.annulus;
    let mut out = LaurentDensity::zero(ann);
    for (m, c) in rho.terms() {
        let freq = m.frequency();
        let f = radial_antiderivative(2 * m.b + 1, m.l);
        let two_c = *c * lit::<T>(2.0);
        for t in &f {
            let half = t.pow / 2;
            out.add_term(
                Monomial::new(freq - 1 + half, half, t.log),
                two_c * lit::<T>(t.coeff),
            );
        }
        let edge = if freq >= 1 { ann.outer() } else { ann.inner() };
        out.add_term(
            Monomial::new(freq - 1, 0, 0),
            -two_c * eval_radial(&f, edge),
        );
    }
    out
}

/// Coefficients `t_k` of `T rho(w) = sum_k t_k v^k` on `|v| < R`.
pub fn inner_coefficients<T: Real>(rho: &LaurentDensity<T>) -> Vec<Complex<T>> {
    let max = rho.max_frequency().unwrap_or(0);
    if max < 1 {
        return Vec::new();
    }
    let mut t = vec![czero::<T>(); max as usize];
    for (m, c) in rho.terms() {
        if m.frequency() >= 1 {
            let k = (m.frequency() - 1) as usize;
            t[k] = t[k] - *c * lit::<T>(2.0) * radial_jump(m, &rho.annulus);
        }
    }
    t
}

/// Laurent tail of `T rho` on `|v| > R + 1`, keyed by the (negative) power of `v`.
pub fn outer_coefficients<T: Real>(rho: &LaurentDensity<T>) -> BTreeMap<i32, Complex<T>> {
    let mut out = BTreeMap::new();
    for (m, c) in rho.terms() {
        if m.frequency() <= 0 {
            let e = out.entry(m.frequency() - 1).or_insert_with(czero::<T>);
            *e = *e + *c * lit::<T>(2.0) * radial_jump(m, &rho.annulus);
        }
    }
    out
}

fn check_band<T: Real>(annulus: &AnnulusSpec<T>, w: Complex<T>) -> Result<T> {
    let s = (w - annulus.c0).norm();
    let band = lit::<T>(BOUNDARY_BAND);
    if (s - annulus.inner()).abs() < band || (s - annulus.outer()).abs() < band {
        return Err(Error::BoundaryBand {
            re: to_f64(w.re),
            im: to_f64(w.im),
        });
    }
    Ok(s)
}

/// `T rho(w)` anywhere off the two boundary bands.
pub fn cauchy_t<T: Real>(rho: &LaurentDensity<T>, w: Complex<T>) -> Result<Complex<T>> {
    let ann = &rho.annulus;
    let s = check_band(ann, w)?;
    let v = w - ann.c0;
    if s < ann.inner() {
        let t = inner_coefficients(rho);
        Ok(t.iter().rev().fold(czero(), |acc, &c| acc * v + c))
    } else if s > ann.outer() {
        Ok(outer_coefficients(rho)
            .iter()
            .fold(czero(), |acc, (&k, &c)| acc + c * cpowi(v, k)))
    } else {
        Ok(cauchy_t_density(rho).eval_formula(w))
    }
}

/// `∂_v` applied term-wise; `ln|v| = (ln v + ln conj v) / 2`.
pub fn d_holomorphic<T: Real>(rho: &LaurentDensity<T>) -> LaurentDensity<T> {
    let mut out = LaurentDensity::zero(rho.annulus);
    for (m, c) in rho.terms() {
        if m.a != 0 {
            out.add_term(Monomial::new(m.a - 1, m.b, m.l), *c * lit::<T>(m.a as f64));
        }
        if m.l > 0 {
            out.add_term(
                Monomial::new(m.a - 1, m.b, m.l - 1),
                *c * lit::<T>(m.l as f64 / 2.0),
            );
        }
    }
    out
}

/// `Pi rho` in all three regions.
#[derive(Clone, Debug, PartialEq)]
pub struct BeurlingImage<T> {
    /// On the annulus; the family is closed under `Pi`, so nothing is left over.
    pub annulus_part: LaurentDensity<T>,
    /// Polynomial coefficients on `|v| < R`.
    pub inner: Vec<Complex<T>>,
    /// Laurent tail on `|v| > R + 1`, keyed by power.
    pub outer: BTreeMap<i32, Complex<T>>,
}

impl<T: Real> BeurlingImage<T> {
    pub fn eval(&self, w: Complex<T>) -> Result<Complex<T>> {
        let ann = &self.annulus_part.annulus;
        let s = check_band(ann, w)?;
        let v = w - ann.c0;
        if s < ann.inner() {
            Ok(self.inner.iter().rev().fold(czero(), |acc, &c| acc * v + c))
        } else if s > ann.outer() {
            Ok(self
                .outer
                .iter()
                .fold(czero(), |acc, (&k, &c)| acc + c * cpowi(v, k)))
        } else {
            Ok(self.annulus_part.eval_formula(w))
        }
    }

    /// `∬_C |Pi rho|^2` summed over the three regions in closed form.
    pub fn l2_norm_sq(&self) -> T {
        let ann = &self.annulus_part.annulus;
        let mut total = self.annulus_part.l2_norm_sq();
        for (j, c) in self.inner.iter().enumerate() {
            // ∬_{|v|<R} |v|^{2j} = pi R^{2j+2} / (j + 1)
            total = total
                + c.norm_sqr() * T::PI() * ann.inner().powi(2 * j as i32 + 2) / lit(j as f64 + 1.0);
        }
        for (&k, c) in &self.outer {
            debug_assert!(k <= -2);
            // ∬_{|v|>R+1} |v|^{2k} = pi (R+1)^{2k+2} / (-k - 1)
            total = total
                + c.norm_sqr() * T::PI() * ann.outer().powi(2 * k + 2) / lit(-(k as f64) - 1.0);
        }
        total
    }
}

pub fn beurling_pi<T: Real>(rho: &LaurentDensity<T>) -> BeurlingImage<T> {
    let annulus_part = d_holomorphic(&cauchy_t_density(rho));
    let t = inner_coefficients(rho);
    let inner = (1..t.len()).map(|k| t[k] * lit::<T>(k as f64)).collect();
    let outer = outer_coefficients(rho)
        .into_iter()
        .map(|(k, c)| (k - 1, c * lit::<T>(k as f64)))
        .collect();
    BeurlingImage {
        annulus_part,
        inner,
        outer,
    }
}

/// `Pi rho` restricted to the annulus, the only part the Neumann iteration needs.
pub fn beurling_pi_annulus<T: Real>(rho: &LaurentDensity<T>) -> LaurentDensity<T> {
    d_holomorphic(&cauchy_t_density(rho))
}

/// `<nu, phi> = -(1/pi) ∬_{G_R} nu phi`.
pub fn pairing<T: Real>(nu: &LaurentDensity<T>, phi: &LaurentDensity<T>) -> Result<Complex<T>> {
    if nu.annulus != phi.annulus {
        return Err(Error::AnnulusMismatch);
    }
    let ann = nu.annulus;
    let mut acc = czero::<T>();
    for (m1, c1) in nu.terms() {
        for (m2, c2) in phi.terms() {
            let m = m1.times(m2);
            if m.a != m.b {
                continue;
            }
            let radial = radial_integral(2 * m.a + 1, m.l, ann.inner(), ann.outer());
            acc = acc - *c1 * *c2 * radial * lit::<T>(2.0);
        }
    }
    Ok(acc)
}

/// `<rho, phi_k>` without building `phi_k`.
pub fn pair_with_basis<T: Real>(rho: &LaurentDensity<T>, k: usize) -> Complex<T> {
    let target = k as i32 + 1;
    rho.terms()
        .filter(|(m, _)| m.frequency() == target)
        .fold(czero(), |acc, (m, c)| {
            acc - *c * lit::<T>(2.0) * radial_jump(m, &rho.annulus)
        })
}

/// `phi_k = u^{-k-1}`.
pub fn basis_fraction<T: Real>(k: usize, annulus: AnnulusSpec<T>) -> LaurentDensity<T> {
    LaurentDensity::monomial(
        annulus,
        Monomial::new(-(k as i32) - 1, 0, 0),
        Complex::new(T::one(), T::zero()),
    )
}

/// `conj(phi_k) = conj(u)^{-k-1}`.
pub fn basis_fraction_conj<T: Real>(k: usize, annulus: AnnulusSpec<T>) -> LaurentDensity<T> {
    basis_fraction(k, annulus).conj()
}

/// `r_k^2 = (1/pi) ∬_{G_R} |phi_k|^2`.
pub fn gram_r2<T: Real>(k: usize, annulus: &AnnulusSpec<T>) -> T {
    let (r0, r1) = (annulus.inner(), annulus.outer());
    if k == 0 {
        lit::<T>(2.0) * (r1 / r0).ln()
    } else {
        let two_k = 2 * k as i32;
        (r0.powi(-two_k) - r1.powi(-two_k)) / lit(k as f64)
    }
}
