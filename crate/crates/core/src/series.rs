//! Truncated power series on the unit disk.
//!
//! A [`PowerSeries`] stores `c_0..c_N` with the truncation degree `N` explicit.
//! Binary operations truncate to the smaller operand degree, so every result
//! is exact modulo `z^{N+1}` (up to rounding).
//!
//! Branch-sensitive operations (`log_series`, `principal_power`) anchor the
//! branch at the principal logarithm of `c_0` and continue it through series
//! arithmetic. They refuse series that wind around the origin on the circle
//! of radius `sample_radius_hint`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cis, cnt, cone, creal, czero, is_finite_c, lit, to_f64, Real};

/// Radius used for boundary checks when none is set explicitly.
pub const DEFAULT_RADIUS_HINT: f64 = 0.999;

/// Relative modulus below which a sample counts as a zero on the contour.
pub const CONTOUR_ZERO_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<T> {
    coeffs: Vec<Complex<T>>,
    sample_radius_hint: T,
}

/// Samples of a function at `z_k = radius * exp(2 pi i k / M)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct BoundarySamples<T> {
    pub radius: T,
    pub values: Vec<Complex<T>>,
}

/// Outcome of the argument-principle check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroFreeReport<T> {
    pub nonvanishing: bool,
    /// Zeros inside the circle, counted with multiplicity.
    pub winding: i64,
    pub min_modulus: T,
    pub max_modulus: T,
}

impl<T: Real> PowerSeries<T> {
    /// Builds a series from `c_0..c_N`. Rejects empty input and non-finite values.
    pub fn new(coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("a series needs at least c_0".into()));
        }
        if let Some(k) = coeffs.iter().position(|c| !is_finite_c(*c)) {
            return Err(Error::Domain(format!("coefficient c_{k} is not finite")));
        }
        Ok(Self {
            coeffs,
            sample_radius_hint: lit(DEFAULT_RADIUS_HINT),
        })
    }

    pub fn from_real(coeffs: &[T]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| creal(c)).collect())
    }

    pub(crate) fn from_vec_unchecked(coeffs: Vec<Complex<T>>, hint: T) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self {
            coeffs,
            sample_radius_hint: hint,
        }
    }

    pub fn zeros(degree: usize) -> Self {
        Self::from_vec_unchecked(vec![czero(); degree + 1], lit(DEFAULT_RADIUS_HINT))
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::from_vec_unchecked(vec![c], lit(DEFAULT_RADIUS_HINT))
    }

    /// `z` truncated at `degree >= 1`.
    pub fn identity(degree: usize) -> Self {
        Self::monomial(1, degree)
    }

    pub fn monomial(k: usize, degree: usize) -> Self {
        let mut s = Self::zeros(degree.max(k));
        s.coeffs[k] = cone();
        s
    }

    pub fn with_radius_hint(mut self, r: T) -> Self {
        assert!(
            r > T::zero() && r <= T::one(),
            "radius hint must lie in (0, 1]"
        );
        self.sample_radius_hint = r;
        self
    }

    pub fn radius_hint(&self) -> T {
        self.sample_radius_hint
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// `c_n`, or zero past the truncation degree.
    pub fn coeff(&self, n: usize) -> Complex<T> {
        self.coeffs.get(n).copied().unwrap_or_else(czero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re == T::zero() && c.im == T::zero())
    }

    /// Truncates or zero-pads to the given degree.
    pub fn resized(&self, degree: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(degree + 1, czero());
        Self::from_vec_unchecked(c, self.sample_radius_hint)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let n = self.degree().max(other.degree());
        (0..=n).fold(T::zero(), |m, k| {
            m.max((self.coeff(k) - other.coeff(k)).norm())
        })
    }

    /// Horner evaluation. Errors outside the closed unit disk.
    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        if z.norm() > T::one() + T::epsilon() {
            return Err(Error::Domain(format!(
                "evaluation point |z| = {} outside the closed unit disk",
                to_f64(z.norm())
            )));
        }
        Ok(self.horner(z))
    }

    /// Horner evaluation without the domain check.
    pub fn horner(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(czero(), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_vec_unchecked(
            self.coeffs.iter().map(|&c| c * s).collect(),
            self.sample_radius_hint,
        )
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(creal(s))
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::from_vec_unchecked(vec![czero()], self.sample_radius_hint);
        }
        let c = (1..=self.degree())
            .map(|k| self.coeffs[k] * cnt::<T>(k))
            .collect();
        Self::from_vec_unchecked(c, self.sample_radius_hint)
    }

    /// Antiderivative with the given constant term; degree grows by one.
    pub fn antiderivative(&self, c0: Complex<T>) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(c0);
        c.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| a / cnt::<T>(k + 1)),
        );
        Self::from_vec_unchecked(c, self.sample_radius_hint)
    }

    /// Multiplicative inverse; needs `c_0 != 0`.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() == T::zero() {
            return Err(if self.is_zero() {
                Error::ZeroSeries
            } else {
                Error::DegenerateLeading
            });
        }
        let inv0 = c0.inv();
        let n = self.degree();
        let mut g = vec![czero(); n + 1];
        g[0] = inv0;
        for k in 1..=n {
            let mut s = czero::<T>();
            for i in 1..=k {
                s = s + self.coeffs[i] * g[k - i];
            }
            g[k] = -s * inv0;
        }
        Ok(Self::from_vec_unchecked(g, self.sample_radius_hint))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.reciprocal()?)
    }

    /// `exp(f)` by the recurrence `n g_n = sum_k k f_k g_{n-k}`.
    pub fn exp(&self) -> Self {
        let n = self.degree();
        let mut g = vec![czero(); n + 1];
        g[0] = self.coeffs[0].exp();
        for m in 1..=n {
            let mut s = czero();
            for k in 1..=m {
                s = s + self.coeffs[k] * g[m - k] * cnt::<T>(k);
            }
            g[m] = s / cnt::<T>(m);
        }
        Self::from_vec_unchecked(g, self.sample_radius_hint)
    }

    fn check_branch(&self) -> Result<()> {
        if self.is_zero() {
            return Err(Error::ZeroSeries);
        }
        if self.coeffs[0].norm() == T::zero() {
            return Err(Error::DegenerateLeading);
        }
        let r = self.sample_radius_hint;
        let report = self.is_nonvanishing(r)?;
        if !report.nonvanishing {
            return Err(Error::Branch {
                winding: report.winding,
                radius: to_f64(r),
            });
        }
        Ok(())
    }

    /// Principal logarithm: `log c_0 + ∫ f'/f`.
    pub fn log_series(&self) -> Result<Self> {
        self.check_branch()?;
        Ok(self.log_unchecked())
    }

    pub(crate) fn log_unchecked(&self) -> Self {
        let q = &self.derivative() * &self.reciprocal().expect("c_0 checked nonzero");
        let mut out = q.antiderivative(self.coeffs[0].ln());
        out.coeffs.truncate(self.coeffs.len());
        out.coeffs.resize(self.coeffs.len(), czero());
        out
    }

    /// `exp(alpha log f)` on the principal branch.
    pub fn principal_power(&self, alpha: T) -> Result<Self> {
        self.check_branch()?;
        Ok(self.log_unchecked().scale_real(alpha).exp())
    }

    /// `f(z^m)`: the coefficient at `z^{mn}` is `c_n`, degree becomes `m N`.
    pub fn compose_power(&self, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("compose_power needs m >= 1".into()));
        }
        let mut c = vec![czero(); m * self.degree() + 1];
        for (k, &a) in self.coeffs.iter().enumerate() {
            c[m * k] = a;
        }
        Ok(Self::from_vec_unchecked(c, self.sample_radius_hint))
    }

    /// `self ∘ inner` for an inner series with zero constant term. The result
    /// has the inner degree.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.coeffs[0].norm() != T::zero() {
            return Err(Error::Domain(
                "inner series of a composition must vanish at 0".into(),
            ));
        }
        let n = inner.degree();
        let mut acc = Self::zeros(n);
        for &c in self.coeffs.iter().rev() {
            acc = &acc * inner;
            acc.coeffs[0] = acc.coeffs[0] + c;
        }
        acc.sample_radius_hint = self.sample_radius_hint.min(inner.sample_radius_hint);
        Ok(acc)
    }

    /// Values on `M` equally spaced points of `|z| = r`, computed by one inverse FFT.
    /// Degrees at or above `M` fold onto the grid exactly.
    pub fn sample_circle(&self, r: T, m: usize) -> BoundarySamples<T> {
        assert!(m >= 1);
        let mut buf = vec![czero::<T>(); m];
        let mut rk = T::one();
        for (k, &c) in self.coeffs.iter().enumerate() {
            buf[k % m] = buf[k % m] + c * rk;
            rk = rk * r;
        }
        let mut planner = FftPlanner::<T>::new();
        planner.plan_fft_inverse(m).process(&mut buf);
        BoundarySamples {
            radius: r,
            values: buf,
        }
    }

    /// Argument-principle zero count on `|z| = r`.
    ///
    /// Argument increments are summed over an FFT grid and bisected with Horner
    /// evaluations wherever the phase jumps by more than half a radian.
    pub fn is_nonvanishing(&self, r: T) -> Result<ZeroFreeReport<T>> {
        if !(r > T::zero() && r <= T::one()) {
            return Err(Error::Domain("winding radius must lie in (0, 1]".into()));
        }
        if self.is_zero() {
            return Err(Error::ZeroSeries);
        }
        let m = (8 * (self.degree() + 1)).max(512).next_power_of_two();
        let samples = self.sample_circle(r, m);
        let step = T::TAU() / cnt(m);
        let mut tracker = ArgTracker {
            series: self,
            radius: r,
            min_modulus: T::infinity(),
            min_angle: T::zero(),
            max_modulus: T::zero(),
            unresolved: false,
        };
        for (k, v) in samples.values.iter().enumerate() {
            tracker.observe(cnt::<T>(k) * step, *v);
        }
        let mut total = T::zero();
        for k in 0..m {
            let a = cnt::<T>(k) * step;
            let va = samples.values[k];
            let vb = samples.values[(k + 1) % m];
            total = total + tracker.arc(a, va, a + step, vb, 40);
        }
        let threshold = lit::<T>(CONTOUR_ZERO_THRESHOLD) * tracker.max_modulus;
        if tracker.min_modulus <= threshold || tracker.unresolved {
            return Err(Error::ZeroNearContour {
                radius: to_f64(r),
                angle: to_f64(tracker.min_angle),
                modulus: to_f64(tracker.min_modulus),
            });
        }
        let turns = total / T::TAU();
        let winding = turns.round();
        if (turns - winding).abs() > lit(0.25) {
            return Err(Error::ZeroNearContour {
                radius: to_f64(r),
                angle: to_f64(tracker.min_angle),
                modulus: to_f64(tracker.min_modulus),
            });
        }
        let winding = winding.to_i64().unwrap_or(i64::MAX);
        Ok(ZeroFreeReport {
            nonvanishing: winding == 0,
            winding,
            min_modulus: tracker.min_modulus,
            max_modulus: tracker.max_modulus,
        })
    }

    /// `c_n` read off boundary samples, divided by `radius^n`.
    pub fn coeffs_from_boundary(s: &BoundarySamples<T>, n: usize) -> Result<Self> {
        let m = s.values.len();
        if 2 * n + 1 > m {
            return Err(Error::Aliasing {
                degree: n,
                samples: m,
                needed: 2 * n + 1,
            });
        }
        let mut buf = s.values.clone();
        let mut planner = FftPlanner::<T>::new();
        planner.plan_fft_forward(m).process(&mut buf);
        let inv_m = T::one() / cnt(m);
        let mut rk = T::one();
        let mut c = Vec::with_capacity(n + 1);
        for v in buf.iter().take(n + 1) {
            c.push(*v * inv_m / rk);
            rk = rk * s.radius;
        }
        Ok(Self::from_vec_unchecked(
            c,
            s.radius.min(lit(DEFAULT_RADIUS_HINT)),
        ))
    }

    /// Integer power by repeated multiplication, truncated at this degree.
    pub fn powu(&self, k: usize) -> Self {
        let mut acc = Self::constant(cone()).resized(self.degree());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

struct ArgTracker<'a, T> {
    series: &'a PowerSeries<T>,
    radius: T,
    min_modulus: T,
    min_angle: T,
    max_modulus: T,
    unresolved: bool,
}

impl<T: Real> ArgTracker<'_, T> {
    fn observe(&mut self, angle: T, v: Complex<T>) {
        let m = v.norm();
        if m < self.min_modulus {
            self.min_modulus = m;
            self.min_angle = angle;
        }
        if m > self.max_modulus {
            self.max_modulus = m;
        }
    }

    fn arc(&mut self, a: T, va: Complex<T>, b: T, vb: Complex<T>, depth: u32) -> T {
        let d = if va.norm() == T::zero() {
            T::zero()
        } else {
            (vb / va).arg()
        };
        if d.abs() <= lit(0.5) {
            return d;
        }
        if depth == 0 {
            self.unresolved = true;
            return d;
        }
        let mid = (a + b) / lit(2.0);
        let vm = self.series.horner(cis(mid) * self.radius);
        self.observe(mid, vm);
        self.arc(a, va, mid, vm, depth - 1) + self.arc(mid, vm, b, vb, depth - 1)
    }
}

impl<T: Real> BoundarySamples<T> {
    /// Needs a power-of-two sample count and a radius in `(0, 1]`.
    pub fn new(radius: T, values: Vec<Complex<T>>) -> Result<Self> {
        if !(radius > T::zero() && radius <= T::one()) {
            return Err(Error::Domain("sample radius must lie in (0, 1]".into()));
        }
        if !values.len().is_power_of_two() {
            return Err(Error::Domain(format!(
                "sample count {} is not a power of two",
                values.len()
            )));
        }
        Ok(Self { radius, values })
    }

    /// Samples an arbitrary function on the circle.
    pub fn from_fn(radius: T, m: usize, f: impl Fn(Complex<T>) -> Complex<T>) -> Result<Self> {
        let step = T::TAU() / cnt(m);
        let values = (0..m)
            .map(|k| f(cis(cnt::<T>(k) * step) * radius))
            .collect();
        Self::new(radius, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<T: Real> $trait<&PowerSeries<T>> for &PowerSeries<T> {
            type Output = PowerSeries<T>;
            fn $method(self, rhs: &PowerSeries<T>) -> PowerSeries<T> {
                let n = self.degree().min(rhs.degree());
                let c = (0..=n).map(|k| self.coeffs[k] $op rhs.coeffs[k]).collect();
                PowerSeries::from_vec_unchecked(
                    c,
                    self.sample_radius_hint.min(rhs.sample_radius_hint),
                )
            }
        }
        impl<T: Real> $trait for PowerSeries<T> {
            type Output = PowerSeries<T>;
            fn $method(self, rhs: PowerSeries<T>) -> PowerSeries<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl<T: Real> Mul<&PowerSeries<T>> for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn mul(self, rhs: &PowerSeries<T>) -> PowerSeries<T> {
        let n = self.degree().min(rhs.degree());
        let mut c = vec![czero(); n + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.re == T::zero() && a.im == T::zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate().take(n + 1 - i) {
                c[i + j] = c[i + j] + a * b;
            }
        }
        PowerSeries::from_vec_unchecked(c, self.sample_radius_hint.min(rhs.sample_radius_hint))
    }
}

impl<T: Real> Mul for PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn mul(self, rhs: PowerSeries<T>) -> PowerSeries<T> {
        &self * &rhs
    }
}

impl<T: Real> Neg for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn neg(self) -> PowerSeries<T> {
        self.scale_real(-T::one())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
struct SeriesRepr<T> {
    degree: usize,
    coeffs: Vec<Complex<T>>,
    #[serde(default)]
    sample_radius_hint: Option<T>,
}

impl<T: Real + Serialize> Serialize for PowerSeries<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            degree: self.degree(),
            coeffs: self.coeffs.clone(),
            sample_radius_hint: Some(self.sample_radius_hint),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for PowerSeries<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SeriesRepr::<T>::deserialize(d)?;
        if repr.coeffs.len() != repr.degree + 1 {
            return Err(D::Error::custom(format!(
                "degree {} but {} coefficients",
                repr.degree,
                repr.coeffs.len()
            )));
        }
        let mut s = PowerSeries::new(repr.coeffs).map_err(D::Error::custom)?;
        if let Some(r) = repr.sample_radius_hint {
            if !(r > T::zero() && r <= T::one()) {
                return Err(D::Error::custom("sample_radius_hint outside (0, 1]"));
            }
            s.sample_radius_hint = r;
        }
        Ok(s)
    }
}
