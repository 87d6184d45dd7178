//! Finite monomial densities on the annulus `R < |zeta - c0| < R + 1`.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cnt, czero, is_finite_c, lit, to_f64, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct AnnulusSpec<T> {
    pub c0: Complex<T>,
    #[serde(rename = "R")]
    pub r: T,
}

impl<T: Real> AnnulusSpec<T> {
    pub fn new(c0: Complex<T>, r: T) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() || !is_finite_c(c0) {
            return Err(Error::Domain(
                "annulus needs a finite center and R > 0".into(),
            ));
        }
        Ok(Self { c0, r })
    }

    pub fn inner(&self) -> T {
        self.r
    }

    pub fn outer(&self) -> T {
        self.r + T::one()
    }

    /// `|w - c0|` strictly between the two circles.
    pub fn contains(&self, w: Complex<T>) -> bool {
        let s = (w - self.c0).norm();
        s > self.inner() && s < self.outer()
    }

    pub fn area(&self) -> T {
        T::PI() * (self.outer() * self.outer() - self.inner() * self.inner())
    }
}

/// `u^a conj(u)^b (ln |u|)^l` with `u = zeta - c0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub a: i32,
    pub b: i32,
    pub l: u32,
}

impl Monomial {
    pub const fn new(a: i32, b: i32, l: u32) -> Self {
        Self { a, b, l }
    }

    /// Angular frequency `a - b`.
    pub fn frequency(&self) -> i32 {
        self.a - self.b
    }

    pub fn times(&self, o: &Monomial) -> Monomial {
        Monomial::new(self.a + o.a, self.b + o.b, self.l + o.l)
    }
}

/// Terms `c r^pow (ln r)^log` of an antiderivative in `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialTerm {
    pub pow: i32,
    pub log: u32,
    pub coeff: f64,
}

/// Antiderivative of `r^q (ln r)^l`.
pub fn radial_antiderivative(q: i32, l: u32) -> Vec<RadialTerm> {
    if q == -1 {
        return vec![RadialTerm {
            pow: 0,
            log: l + 1,
            coeff: 1.0 / (l as f64 + 1.0),
        }];
    }
    let q1 = (q + 1) as f64;
    let mut out = Vec::with_capacity(l as usize + 1);
    let mut c = 1.0 / q1;
    for i in 0..=l {
        out.push(RadialTerm {
            pow: q + 1,
            log: l - i,
            coeff: c,
        });
        // next: (-1)^{i+1} l! / (l-i-1)! / (q+1)^{i+2}
        c = -c * (l - i) as f64 / q1;
    }
    out
}

pub fn eval_radial<T: Real>(terms: &[RadialTerm], r: T) -> T {
    let lr = r.ln();
    terms.iter().fold(T::zero(), |acc, t| {
        acc + lit::<T>(t.coeff) * r.powi(t.pow) * lr.powi(t.log as i32)
    })
}

/// `∫_{r0}^{r1} r^q (ln r)^l dr`.
pub fn radial_integral<T: Real>(q: i32, l: u32, r0: T, r1: T) -> T {
    let f = radial_antiderivative(q, l);
    eval_radial(&f, r1) - eval_radial(&f, r0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentDensity<T> {
    pub annulus: AnnulusSpec<T>,
    terms: BTreeMap<Monomial, Complex<T>>,
}

impl<T: Real> LaurentDensity<T> {
    pub fn zero(annulus: AnnulusSpec<T>) -> Self {
        Self {
            annulus,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(annulus: AnnulusSpec<T>, m: Monomial, c: Complex<T>) -> Self {
        let mut d = Self::zero(annulus);
        d.add_term(m, c);
        d
    }

    pub fn from_terms(
        annulus: AnnulusSpec<T>,
        terms: impl IntoIterator<Item = (Monomial, Complex<T>)>,
    ) -> Result<Self> {
        let mut d = Self::zero(annulus);
        for (m, c) in terms {
            if !is_finite_c(c) {
                return Err(Error::Domain(format!("amplitude of {m:?} is not finite")));
            }
            d.add_term(m, c);
        }
        Ok(d)
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex<T>) {
        let e = self.terms.entry(m).or_insert_with(czero);
        *e = *e + c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Complex<T> {
        self.terms.get(m).copied().unwrap_or_else(czero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .values()
            .all(|c| c.re == T::zero() && c.im == T::zero())
    }

    fn same_annulus(&self, o: &Self) -> Result<()> {
        if self.annulus != o.annulus {
            return Err(Error::AnnulusMismatch);
        }
        Ok(())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            annulus: self.annulus,
            terms: self.terms.iter().map(|(m, c)| (*m, *c * s)).collect(),
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.same_annulus(o)?;
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, *c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.try_add(&o.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.same_annulus(o)?;
        let mut out = Self::zero(self.annulus);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.times(m2), *c1 * *c2);
            }
        }
        Ok(out)
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            annulus: self.annulus,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial::new(m.b, m.a, m.l), c.conj()))
                .collect(),
        }
    }

    /// Value of the monomial sum at `w`, ignoring the support restriction.
    pub fn eval_formula(&self, w: Complex<T>) -> Complex<T> {
        let u = w - self.annulus.c0;
        let r = u.norm();
        let lr = r.ln();
        let e = u / r;
        self.terms.iter().fold(czero(), |acc, (m, c)| {
            let radial = r.powi(m.a + m.b) * lr.powi(m.l as i32);
            let angular = if m.frequency() >= 0 {
                e.powu(m.frequency() as u32)
            } else {
                e.conj().powu(m.frequency().unsigned_abs())
            };
            acc + *c * angular * radial
        })
    }

    /// Value at `w`: the formula on the annulus, zero elsewhere.
    pub fn eval(&self, w: Complex<T>) -> Complex<T> {
        if self.annulus.contains(w) {
            self.eval_formula(w)
        } else {
            czero()
        }
    }

    /// Upper bound for the modulus of a single term on the closed annulus.
    pub fn term_bound(&self, m: &Monomial, c: Complex<T>) -> T {
        let (r0, r1) = (self.annulus.inner(), self.annulus.outer());
        let radial = r0.powi(m.a + m.b).max(r1.powi(m.a + m.b));
        let log = r0.ln().abs().max(r1.ln().abs()).powi(m.l as i32);
        c.norm() * radial * log
    }

    /// Drops terms whose modulus bound on the annulus is below `tol`.
    pub fn pruned(&self, tol: T) -> Self {
        Self {
            annulus: self.annulus,
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| self.term_bound(m, **c) >= tol)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    /// `∬_{G_R} |rho|^2 dx dy` in closed form. Terms of different frequency are orthogonal.
    pub fn l2_norm_sq(&self) -> T {
        let mut by_freq: BTreeMap<i32, Vec<(Monomial, Complex<T>)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            by_freq.entry(m.frequency()).or_default().push((*m, *c));
        }
        let (r0, r1) = (self.annulus.inner(), self.annulus.outer());
        let mut total = T::zero();
        for group in by_freq.values() {
            for (m1, c1) in group {
                for (m2, c2) in group {
                    // u^{a1} ubar^{b1} * conj(u^{a2} ubar^{b2}) has radial power a1+b1+a2+b2.
                    let q = m1.a + m1.b + m2.a + m2.b + 1;
                    let radial = radial_integral(q, m1.l + m2.l, r0, r1);
                    total = total + (*c1 * c2.conj()).re * radial * T::TAU();
                }
            }
        }
        total.max(T::zero())
    }

    pub fn l2_norm(&self) -> T {
        self.l2_norm_sq().sqrt()
    }

    /// Maximum modulus over a polar grid in the open annulus.
    pub fn sup_norm_grid(&self, rings: usize, angles: usize) -> T {
        let mut best = T::zero();
        for i in 0..rings {
            let r = self.annulus.inner() + (cnt::<T>(i) + lit(0.5)) / cnt(rings);
            for k in 0..angles {
                let t = T::TAU() * cnt::<T>(k) / cnt(angles);
                let w = self.annulus.c0 + Complex::from_polar(r, t);
                best = best.max(self.eval_formula(w).norm());
            }
        }
        best
    }

    /// Grid supremum on the default 32 x 256 grid.
    pub fn sup_norm(&self) -> T {
        self.sup_norm_grid(32, 256)
    }

    pub fn max_frequency(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.frequency()).max()
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    a: i32,
    b: i32,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    l: u32,
    re: f64,
    im: f64,
}

fn is_zero_u32(x: &u32) -> bool {
    *x == 0
}

#[derive(Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
struct DensityRepr<T> {
    annulus: AnnulusSpec<T>,
    terms: Vec<TermRepr>,
}

impl<T: Real + Serialize> Serialize for LaurentDensity<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityRepr {
            annulus: self.annulus,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermRepr {
                    a: m.a,
                    b: m.b,
                    l: m.l,
                    re: to_f64(c.re),
                    im: to_f64(c.im),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for LaurentDensity<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DensityRepr::<T>::deserialize(d)?;
        let annulus =
            AnnulusSpec::new(repr.annulus.c0, repr.annulus.r).map_err(D::Error::custom)?;
        LaurentDensity::from_terms(
            annulus,
            repr.terms.into_iter().map(|t| {
                (
                    Monomial::new(t.a, t.b, t.l),
                    Complex::new(lit(t.re), lit(t.im)),
                )
            }),
        )
        .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    type C = Complex<f64>;

    fn ann(r: f64) -> AnnulusSpec<f64> {
        AnnulusSpec::new(C::new(0.3, -0.2), r).unwrap()
    }

    #[test]
    fn antiderivative_differentiates_back() {
        for q in [-3, -1, 0, 2, 5] {
            for l in 0..4u32 {
                let f = radial_antiderivative(q, l);
                let r = 2.7f64;
                let h = 1e-5;
                let d = (eval_radial(&f, r + h) - eval_radial(&f, r - h)) / (2.0 * h);
                let want = r.powi(q) * r.ln().powi(l as i32);
                assert!((d - want).abs() < 1e-8 * want.abs().max(1.0), "q {q} l {l}");
            }
        }
    }

    #[test]
    fn radial_integral_matches_gauss_legendre() {
        let g = GaussLegendre::<f64>::new(40, 2.0, 3.0);
        for (q, l) in [(-5, 0), (-1, 2), (3, 1), (0, 3)] {
            let want = g.integrate(|r| r.powi(q) * r.ln().powi(l));
            let got = radial_integral(q, l as u32, 2.0, 3.0);
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn eval_and_conj() {
        let a = ann(2.0);
        let d = LaurentDensity::from_terms(
            a,
            [
                (Monomial::new(1, -2, 0), C::new(0.5, 0.25)),
                (Monomial::new(0, 0, 1), C::new(-1.0, 0.0)),
            ],
        )
        .unwrap();
        let w = a.c0 + C::from_polar(2.4, 0.9);
        let u = w - a.c0;
        let want = C::new(0.5, 0.25) * u * u.conj().powi(-2) - u.norm().ln();
        assert!((d.eval(w) - want).norm() < 1e-14);
        assert!((d.conj().eval(w) - want.conj()).norm() < 1e-14);
        assert_eq!(d.eval(a.c0 + C::new(1.0, 0.0)), C::new(0.0, 0.0));
    }

    #[test]
    fn exact_l2_matches_quadrature() {
        let a = ann(2.0);
        let d = LaurentDensity::from_terms(
            a,
            [
                (Monomial::new(2, 0, 0), C::new(0.1, 0.0)),
                (Monomial::new(3, 1, 1), C::new(0.0, -0.02)),
                (Monomial::new(0, -3, 0), C::new(0.7, 0.2)),
                (Monomial::new(0, 0, 0), C::new(-0.4, 0.0)),
            ],
        )
        .unwrap();
        let g = GaussLegendre::<f64>::new(40, a.inner(), a.outer());
        let m = 256;
        let mut want = 0.0;
        for (&r, &w) in g.nodes.iter().zip(&g.weights) {
            let mut ring = 0.0;
            for k in 0..m {
                let t = std::f64::consts::TAU * k as f64 / m as f64;
                ring += d.eval_formula(a.c0 + C::from_polar(r, t)).norm_sqr();
            }
            want += w * r * ring * std::f64::consts::TAU / m as f64;
        }
        assert!((d.l2_norm_sq() - want).abs() < 1e-11 * want);
    }

    #[test]
    fn mismatched_annuli() {
        let d1 = LaurentDensity::<f64>::zero(ann(2.0));
        let d2 = LaurentDensity::<f64>::zero(ann(3.0));
        assert_eq!(d1.try_add(&d2).unwrap_err(), Error::AnnulusMismatch);
    }

    #[test]
    fn json_shape() {
        let a = ann(2.0);
        let d = LaurentDensity::monomial(a, Monomial::new(0, -2, 0), C::new(1.5, 0.0));
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["annulus"]["R"], 2.0);
        assert_eq!(v["terms"][0]["b"], -2);
        assert!(v["terms"][0].get("l").is_none());
        let back: LaurentDensity<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
    }
}
