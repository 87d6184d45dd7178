//! Hardy, Bergman and weighted-sup (Bloch type) norms.

use num_complex::Complex;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{cis, cnt, lit, to_f64, Real};
use crate::series::PowerSeries;

pub const HARDY_NODES: usize = 4096;
pub const BERGMAN_RADIAL_NODES: usize = 64;
pub const BLOCH_RINGS: usize = 64;
pub const BLOCH_ANGLES: usize = 256;

/// Which norm a [`NormReport`] describes. Serializes as the exponent or the string `"bloch"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormIndex {
    Exponent(f64),
    Bloch,
}

impl Serialize for NormIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormIndex::Exponent(p) => s.serialize_f64(*p),
            NormIndex::Bloch => s.serialize_str("bloch"),
        }
    }
}

impl<'de> Deserialize<'de> for NormIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = NormIndex;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an exponent or \"bloch\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<NormIndex, E> {
                Ok(NormIndex::Exponent(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<NormIndex, E> {
                Ok(NormIndex::Exponent(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<NormIndex, E> {
                Ok(NormIndex::Exponent(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<NormIndex, E> {
                if v == "bloch" {
                    Ok(NormIndex::Bloch)
                } else {
                    Err(E::custom(format!("unknown norm tag {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct NormReport<T> {
    pub value: T,
    pub p: NormIndex,
    pub quadrature_points: usize,
    pub estimated_error: T,
}

fn check_exponent<T: Real>(p: T) -> Result<()> {
    if p.is_nan() || p < T::one() {
        return Err(Error::UnsupportedExponent(to_f64(p)));
    }
    Ok(())
}

fn circle_mean<T: Real>(f: &PowerSeries<T>, p: T, r: T, m: usize) -> T {
    let s = f.sample_circle(r, m);
    if p.is_infinite() {
        return s.values.iter().fold(T::zero(), |a, v| a.max(v.norm()));
    }
    let sum = s.values.iter().fold(T::zero(), |a, v| a + v.norm().powf(p));
    (sum / cnt(m)).powf(T::one() / p)
}

fn hardy_nodes(degree: usize) -> usize {
    HARDY_NODES.max((8 * (degree + 1)).next_power_of_two())
}

/// `M_p(f, r)`: the `p`-mean of `|f|` on `|z| = r` by the trapezoid rule.
/// `p = inf` gives the grid maximum.
pub fn hardy_norm<T: Real>(f: &PowerSeries<T>, p: T, r: T) -> Result<NormReport<T>> {
    check_exponent(p)?;
    if !(r > T::zero() && r <= T::one()) {
        return Err(Error::Domain("radius must lie in (0, 1]".into()));
    }
    let m = hardy_nodes(f.degree());
    let full = circle_mean(f, p, r, m);
    let half = circle_mean(f, p, r, m / 2);
    Ok(NormReport {
        value: full,
        p: NormIndex::Exponent(to_f64(p)),
        quadrature_points: m,
        estimated_error: (full - half).abs(),
    })
}

/// `M_p(f, r)^p` at each radius.
pub fn mean_function_profile<T: Real>(f: &PowerSeries<T>, p: T, radii: &[T]) -> Result<Vec<T>> {
    check_exponent(p)?;
    if radii.iter().any(|&r| !(r > T::zero() && r <= T::one())) {
        return Err(Error::Domain("profile radii must lie in (0, 1]".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "profile radii must be strictly increasing".into(),
        ));
    }
    let m = hardy_nodes(f.degree());
    Ok(radii
        .iter()
        .map(|&r| circle_mean(f, p, r, m).powf(p))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileDiagnostics<T> {
    /// Smallest `M(r_{i+1}) - M(r_i)`; negative means a decrease.
    pub monotone_defect: T,
    /// Smallest gap between the chord of `log M` in `log r` and `log M` at
    /// interior radii; negative means a convexity failure.
    pub log_convexity_defect: T,
}

impl<T: Real> ProfileDiagnostics<T> {
    pub fn passes(&self, tol: T) -> bool {
        self.monotone_defect >= -tol && self.log_convexity_defect >= -tol
    }
}

pub fn profile_diagnostics<T: Real>(radii: &[T], values: &[T]) -> ProfileDiagnostics<T> {
    assert_eq!(radii.len(), values.len());
    let monotone_defect = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(T::infinity(), T::min);
    let mut log_convexity_defect = T::infinity();
    for i in 1..radii.len().saturating_sub(1) {
        let (v0, v1, v2) = (values[i - 1], values[i], values[i + 1]);
        if v0 <= T::zero() || v1 <= T::zero() || v2 <= T::zero() {
            continue;
        }
        let (x0, x1, x2) = (radii[i - 1].ln(), radii[i].ln(), radii[i + 1].ln());
        let t = (x1 - x0) / (x2 - x0);
        let chord = v0.ln() * (T::one() - t) + v2.ln() * t;
        log_convexity_defect = log_convexity_defect.min(chord - v1.ln());
    }
    ProfileDiagnostics {
        monotone_defect,
        log_convexity_defect,
    }
}

fn bergman_quadrature_value<T: Real>(f: &PowerSeries<T>, p: T, radial: usize, angular: usize) -> T {
    let rule = GaussLegendre::new(radial, T::zero(), T::one());
    let mut acc = T::zero();
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = f.sample_circle(r, angular);
        let ring = s.values.iter().fold(T::zero(), |a, v| a + v.norm().powf(p));
        acc = acc + w * r * ring;
    }
    // (1/pi) * (2 pi / M) * sum  =  2/M * sum
    let mean = acc * lit::<T>(2.0) / cnt(angular);
    mean.powf(T::one() / p)
}

/// `((1/pi) ∬_D |f|^p dx dy)^{1/p}` on the polar product grid.
pub fn bergman_norm_quadrature<T: Real>(f: &PowerSeries<T>, p: T) -> Result<NormReport<T>> {
    check_exponent(p)?;
    let radial = BERGMAN_RADIAL_NODES.max(f.degree() + 8);
    let angular = hardy_nodes(f.degree());
    let full = bergman_quadrature_value(f, p, radial, angular);
    let half = bergman_quadrature_value(f, p, radial / 2, angular / 2);
    Ok(NormReport {
        value: full,
        p: NormIndex::Exponent(to_f64(p)),
        quadrature_points: radial * angular,
        estimated_error: (full - half).abs(),
    })
}

/// Normalized area norm. `p = 2` uses `sum |c_n|^2 / (n + 1)` exactly.
pub fn bergman_norm<T: Real>(f: &PowerSeries<T>, p: T) -> Result<NormReport<T>> {
    check_exponent(p)?;
    if p == lit(2.0) {
        let sq = f
            .coeffs()
            .iter()
            .enumerate()
            .fold(T::zero(), |a, (n, c)| a + c.norm_sqr() / cnt(n + 1));
        return Ok(NormReport {
            value: sq.sqrt(),
            p: NormIndex::Exponent(2.0),
            quadrature_points: 0,
            estimated_error: T::epsilon() * sq.sqrt() * cnt(f.degree() + 1),
        });
    }
    bergman_norm_quadrature(f, p)
}

fn bloch_weighted<T: Real>(f: &PowerSeries<T>, r: T, theta: T) -> T {
    let w = T::one() - r * r;
    w * w * f.horner(cis(theta) * r).norm()
}

fn golden_max<T: Real>(mut a: T, mut b: T, g: impl Fn(T) -> T) -> (T, T) {
    let inv_phi = lit::<T>(0.618_033_988_749_894_9);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - (b - a) * inv_phi;
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + (b - a) * inv_phi;
            gd = g(d);
        }
    }
    if gc > gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// `sup_D (1 - |z|^2)^2 |f(z)|`.
///
/// Scans a polar grid, then refines the best node by alternating golden-section
/// searches in `r` and `theta`. The value is attained at a point, so it never
/// exceeds the true supremum; the error estimate is the refinement gain.
pub fn bloch_norm<T: Real>(f: &PowerSeries<T>) -> NormReport<T> {
    let mut best = (T::zero(), T::zero(), f.coeff(0).norm());
    let dr = T::one() / cnt(BLOCH_RINGS);
    let dtheta = T::TAU() / cnt(BLOCH_ANGLES);
    for i in 1..BLOCH_RINGS {
        let r = cnt::<T>(i) * dr;
        let w = T::one() - r * r;
        let s = f.sample_circle(r, BLOCH_ANGLES);
        for (k, v) in s.values.iter().enumerate() {
            let val = w * w * v.norm();
            if val > best.2 {
                best = (r, cnt::<T>(k) * dtheta, val);
            }
        }
    }
    let coarse = best.2;
    let (mut r, mut theta, mut val) = best;
    for _ in 0..6 {
        let lo = (r - dr).max(T::zero());
        let hi = (r + dr).min(T::one());
        let (r1, v1) = golden_max(lo, hi, |x| bloch_weighted(f, x, theta));
        if v1 > val {
            r = r1;
            val = v1;
        }
        let (t1, v2) = golden_max(theta - dtheta, theta + dtheta, |t| bloch_weighted(f, r, t));
        if v2 > val {
            theta = t1;
            val = v2;
        }
    }
    NormReport {
        value: val,
        p: NormIndex::Bloch,
        quadrature_points: (BLOCH_RINGS - 1) * BLOCH_ANGLES + 1,
        estimated_error: val - coarse,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub in_ball: bool,
    pub hardy: f64,
    pub bloch: f64,
    /// `in_ball` implies `bloch < 2`.
    pub implication_holds: bool,
}

/// Hardy norm against the ball of radius `2^{-1/p}`, together with the weighted sup norm.
pub fn embedding_check<T: Real>(f: &PowerSeries<T>, p: T) -> Result<EmbeddingReport> {
    let hardy = hardy_norm(f, p, T::one())?.value;
    let bloch = bloch_norm(f).value;
    let radius = lit::<T>(2.0).powf(-T::one() / p);
    let in_ball = hardy < radius;
    Ok(EmbeddingReport {
        in_ball,
        hardy: to_f64(hardy),
        bloch: to_f64(bloch),
        implication_holds: !in_ball || bloch < lit(2.0),
    })
}

/// `∑ |c_n|^2`, the squared `H^2` norm of the truncated series.
pub fn coefficient_energy<T: Real>(f: &PowerSeries<T>) -> T {
    f.coeffs()
        .iter()
        .fold(T::zero(), |a, c: &Complex<T>| a + c.norm_sqr())
}
