//! Laurent data of `phi(zeta) = -(p/2) ∬_D |f|^{p-2} conj(f) / (f - zeta) dx dy`
//! outside the disk `|zeta - c0| <= R`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::DiskQuadrature;
use crate::scalar::{cnt, cone, czero, lit, to_f64, Real};
use crate::series::PowerSeries;

use super::density::{AnnulusSpec, LaurentDensity, Monomial};

/// Default expansion order of `phi`.
pub const DEFAULT_PSI_ORDER: usize = 24;

/// Coefficients below this modulus count as zero when deciding which `b_k` vanish.
pub const B_ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PhiData<T> {
    pub annulus: AnnulusSpec<T>,
    pub p: T,
    /// `b_k = (p/2) ∬_D |f|^{p-2} conj(f) (f - c0)^k dx dy`, so `phi = sum_k b_k phi_k`.
    pub b: Vec<Complex<T>>,
    /// Origin-centered data `(p/2) ∬_D |f|^{p-2} conj(f) f^{k-1} dx dy` for `k = 1..=K+1`,
    /// the coefficient of `zeta^{-k}` when `c0 = 0`; index 0 holds `k = 1`.
    pub origin_b: Vec<Complex<T>>,
    /// `∬_D |f|^p dx dy` on the same grid.
    pub area_integral: T,
    /// Upper bound for `sup_D |f - c0|` used in the invariant check.
    pub sup_shift: T,
}

/// Upper bound for `max_{|z|=r} |f|`: grid maximum plus a Lipschitz margin.
pub fn circle_max_upper_bound<T: Real>(f: &PowerSeries<T>, r: T) -> T {
    let m = (16 * (f.degree() + 1)).max(4096).next_power_of_two();
    let grid = f
        .sample_circle(r, m)
        .values
        .iter()
        .fold(T::zero(), |a, v| a.max(v.norm()));
    let mut lip = T::zero();
    let mut rk = T::one();
    for k in 1..=f.degree() {
        lip = lip + cnt::<T>(k) * f.coeff(k).norm() * rk;
        rk = rk * r;
    }
    grid + lip * r * T::PI() / cnt(m)
}

/// Smallest admissible inner radius for `f` with center `c0`: `sup|f| + |c0| + 1`.
pub fn minimal_radius<T: Real>(f: &PowerSeries<T>, c0: Complex<T>) -> T {
    circle_max_upper_bound(f, T::one()) + c0.norm() + T::one()
}

/// Checks `R >= sup_D |f| + |c0| + 1`.
pub fn check_annulus<T: Real>(f: &PowerSeries<T>, annulus: &AnnulusSpec<T>) -> Result<()> {
    let need = minimal_radius(f, annulus.c0);
    if annulus.r < need * (T::one() - lit(1e-12)) {
        return Err(Error::AnnulusInvariant(format!(
            "R = {} below sup|f| + |c0| + 1 = {}",
            to_f64(annulus.r),
            to_f64(need)
        )));
    }
    Ok(())
}

/// `b_0..b_K` and the origin-centered data by product quadrature on the disk.
pub fn phi_functional<T: Real>(
    f: &PowerSeries<T>,
    p: T,
    annulus: AnnulusSpec<T>,
    order: usize,
) -> Result<PhiData<T>> {
    if !(p > T::one()) {
        return Err(Error::Domain(format!("need p > 1, got {}", to_f64(p))));
    }
    check_annulus(f, &annulus)?;
    let quad = DiskQuadrature::<T>::for_degree(f.degree());
    let rings = quad.sample(f);
    let c0 = annulus.c0;
    let half_p = p / lit(2.0);
    let mut b = vec![czero::<T>(); order + 1];
    let mut origin_b = vec![czero::<T>(); order + 1];
    let mut area = T::zero();
    let dtheta = T::TAU() / cnt(quad.angular);
    let mut sup_shift = T::zero();
    for (i, ring) in rings.iter().enumerate() {
        let wr = quad.radial.weights[i] * quad.radial.nodes[i] * dtheta;
        for &fz in ring {
            let modulus = fz.norm();
            let weight = fz.conj() * modulus.powf(p - lit(2.0)) * wr;
            area = area + modulus.powf(p) * wr;
            let g = fz - c0;
            sup_shift = sup_shift.max(g.norm());
            let mut gk = cone::<T>();
            let mut fk = cone::<T>();
            for k in 0..=order {
                b[k] = b[k] + weight * gk;
                origin_b[k] = origin_b[k] + weight * fk;
                gk = gk * g;
                fk = fk * fz;
            }
        }
    }
    for v in b.iter_mut().chain(origin_b.iter_mut()) {
        *v = *v * half_p;
    }
    Ok(PhiData {
        annulus,
        p,
        b,
        origin_b,
        area_integral: area,
        sup_shift,
    })
}

impl<T: Real> PhiData<T> {
    pub fn order(&self) -> usize {
        self.b.len() - 1
    }

    /// `psi = sum_{k not in targeted} b_k phi_k`, with negligible `b_k` dropped.
    pub fn psi(&self, targeted: std::ops::RangeInclusive<usize>) -> LaurentDensity<T> {
        let mut d = LaurentDensity::zero(self.annulus);
        for (k, &bk) in self.b.iter().enumerate() {
            if targeted.contains(&k) || bk.norm() < lit(B_ZERO_TOL) {
                continue;
            }
            d.add_term(Monomial::new(-(k as i32) - 1, 0, 0), bk);
        }
        d
    }

    /// `phi(zeta)` from the truncated expansion.
    pub fn eval(&self, zeta: Complex<T>) -> Complex<T> {
        let inv = (zeta - self.annulus.c0).inv();
        self.b
            .iter()
            .rev()
            .fold(czero::<T>(), |acc, &bk| acc * inv + bk)
            * inv
    }

    /// The coefficient of `zeta^{-2}` in the origin-centered expansion, `(p/2) ∬ |f|^p`.
    pub fn origin_b2(&self) -> Complex<T> {
        self.origin_b[1]
    }
}
