//! Schwarzian derivatives, their inversion through `2 eta'' + phi eta = 0`, the
//! exterior inversion `W(z) = 1/w(1/z)` and the Koebe-type covering check.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, cnt, cone, czero, lit, to_f64, Real};
use crate::series::PowerSeries;

/// Samples of the boundary curve in the covering check.
pub const COVERING_SAMPLES: usize = 2048;

/// `S_w = (w''/w')' - (w''/w')^2 / 2`, exact through degree `deg w - 3`.
pub fn schwarzian_of<T: Real>(w: &PowerSeries<T>) -> Result<PowerSeries<T>> {
    let wp = w.derivative();
    if wp.coeff(0).norm() == T::zero() {
        return Err(Error::NotLocallyUnivalent);
    }
    let out = w.degree().saturating_sub(3);
    if w.degree() < 3 {
        // (w''/w')' - (w''/w')^2/2 at z = 0 for a quadratic w
        let q0 = w.coeff(2) * lit::<T>(2.0) / wp.coeff(0);
        let q1 = -q0 * q0;
        let s0 = q1 - q0 * q0 * lit::<T>(0.5);
        return Ok(PowerSeries::from_vec_unchecked(vec![s0], w.radius_hint()).resized(out));
    }
    let q = &wp.derivative() * &wp.reciprocal()?;
    let s = &q.derivative() - &(&q * &q).scale_real(lit(0.5));
    Ok(s.resized(out))
}

/// The two normalized solutions of `2 eta'' + phi eta = 0` through `degree`,
/// treating `phi` as a polynomial.
pub fn schwarzian_basis<T: Real>(
    phi: &PowerSeries<T>,
    degree: usize,
) -> (PowerSeries<T>, PowerSeries<T>) {
    let solve = |e0: Complex<T>, e1: Complex<T>| {
        let mut e = vec![czero::<T>(); degree + 1];
        e[0] = e0;
        if degree >= 1 {
            e[1] = e1;
        }
        for k in 0..degree.saturating_sub(1) {
            let mut s = czero::<T>();
            for i in 0..=k.min(phi.degree()) {
                s = s + phi.coeff(i) * e[k - i];
            }
            e[k + 2] = -s * lit::<T>(0.5) / cnt::<T>((k + 2) * (k + 1));
        }
        PowerSeries::from_vec_unchecked(e, phi.radius_hint())
    };
    (solve(cone(), czero()), solve(czero(), cone()))
}

/// `w = e^{i theta} eta_2 / eta_1` of degree `deg phi + 3`, so `S_w = phi` through `deg phi`.
///
/// A zero of `eta_1` inside the sampling radius of `phi` is a pole of `w` and is reported.
pub fn solve_schwarzian<T: Real>(phi: &PowerSeries<T>, theta: T) -> Result<PowerSeries<T>> {
    let degree = phi.degree() + 3;
    let (eta1, eta2) = schwarzian_basis(phi, degree);
    let r = phi.radius_hint();
    let report = eta1.is_nonvanishing(r);
    let vanishes = match &report {
        Ok(z) => !z.nonvanishing,
        Err(Error::ZeroNearContour { .. }) => true,
        Err(_) => false,
    };
    if vanishes {
        let z = locate_zero(&eta1, r);
        return Err(Error::Pole {
            re: to_f64(z.re),
            im: to_f64(z.im),
        });
    }
    report?;
    let w = &eta2 * &eta1.reciprocal()?;
    Ok(w.scale(cis(theta)))
}

/// A zero of `f` in `|z| <= r` by Newton from the best point of a polar grid.
fn locate_zero<T: Real>(f: &PowerSeries<T>, r: T) -> Complex<T> {
    let mut best = czero::<T>();
    let mut best_val = f.horner(best).norm();
    for i in 1..=32 {
        let rad = r * cnt::<T>(i) / lit(32.0);
        for k in 0..128 {
            let z = Complex::from_polar(rad, T::TAU() * cnt::<T>(k) / lit(128.0));
            let v = f.horner(z).norm();
            if v < best_val {
                best = z;
                best_val = v;
            }
        }
    }
    let fp = f.derivative();
    for _ in 0..50 {
        let d = fp.horner(best);
        if d.norm() == T::zero() {
            break;
        }
        let step = f.horner(best) / d;
        best = best - step;
        if step.norm() < lit(1e-15) {
            break;
        }
    }
    best
}

/// `W(z) = lead z + b_0 + b_1 z^{-1} + ...`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct ExteriorSeries<T> {
    pub lead: Complex<T>,
    pub b: Vec<Complex<T>>,
}

impl<T: Real> ExteriorSeries<T> {
    /// `W(z)` for `|z| > 1`.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let inv = z.inv();
        let tail = self
            .b
            .iter()
            .rev()
            .fold(czero::<T>(), |acc, &c| acc * inv + c);
        self.lead * z + tail
    }
}

fn check_origin<T: Real>(w: &PowerSeries<T>) -> Result<()> {
    if w.coeff(0).norm() > lit(1e-12) {
        return Err(Error::Precondition("w(0) must vanish".into()));
    }
    if w.coeff(1).norm() == T::zero() {
        return Err(Error::NotLocallyUnivalent);
    }
    Ok(())
}

/// Coefficients of `1/w(1/z)`: `w(u) = u v(u)` gives `W(z) = z (1/v)(1/z)`.
pub fn invert_map<T: Real>(w: &PowerSeries<T>) -> Result<ExteriorSeries<T>> {
    check_origin(w)?;
    let v = PowerSeries::from_vec_unchecked(w.coeffs()[1..].to_vec(), w.radius_hint());
    let g = v.reciprocal()?;
    Ok(ExteriorSeries {
        lead: g.coeff(0),
        b: g.coeffs()[1..].to_vec(),
    })
}

/// `a_n` of `w = e^{i theta} z + a_2 z^2 + ...` from the exterior coefficients, through
/// `e^{i theta} b_m + sum_{j=1}^m b_{m-j} a_{j+1} + e^{-i theta} a_{m+2} = 0`.
pub fn a_from_b<T: Real>(b: &[Complex<T>], theta: T, n: usize) -> Result<Complex<T>> {
    if n == 0 {
        return Ok(czero());
    }
    let rot = cis(theta);
    if n == 1 {
        return Ok(rot);
    }
    if b.len() + 1 < n {
        return Err(Error::Precondition(format!(
            "a_{n} needs b_0..b_{}, got {} terms",
            n - 2,
            b.len()
        )));
    }
    // a[k] holds a_k
    let mut a = vec![czero::<T>(); n + 1];
    a[1] = rot;
    for m in 0..=n - 2 {
        let mut s = rot * b[m];
        for j in 1..=m {
            s = s + b[m - j] * a[j + 1];
        }
        a[m + 2] = -rot * s;
    }
    Ok(a[n])
}

/// A normalized map and its Schwarzian with the rotation parameters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct SchwarzianPair<T> {
    pub w: PowerSeries<T>,
    pub phi: PowerSeries<T>,
    pub theta: T,
    pub tau: T,
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    theta: f64,
    tau: f64,
    w_coeffs: Vec<[f64; 2]>,
    phi_coeffs: Vec<[f64; 2]>,
}

fn pairs<T: Real>(s: &PowerSeries<T>) -> Vec<[f64; 2]> {
    s.coeffs()
        .iter()
        .map(|c| [to_f64(c.re), to_f64(c.im)])
        .collect()
}

fn unpairs<T: Real>(v: &[[f64; 2]]) -> Result<PowerSeries<T>> {
    PowerSeries::new(
        v.iter()
            .map(|c| Complex::new(lit(c[0]), lit(c[1])))
            .collect(),
    )
}

impl<T: Real> Serialize for SchwarzianPair<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PairRepr {
            theta: to_f64(self.theta),
            tau: to_f64(self.tau),
            w_coeffs: pairs(&self.w),
            phi_coeffs: pairs(&self.phi),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for SchwarzianPair<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = PairRepr::deserialize(d)?;
        Ok(Self {
            w: unpairs(&r.w_coeffs).map_err(D::Error::custom)?,
            phi: unpairs(&r.phi_coeffs).map_err(D::Error::custom)?,
            theta: lit(r.theta),
            tau: lit(r.tau),
        })
    }
}

/// `w_{tau,theta}(z) = e^{-i theta} w(e^{i tau} z)` for `w` in the class `S`, with a
/// check of `S_{w_{tau,theta}}(z) = e^{2 i tau} S_w(e^{i tau} z)`.
pub fn normalize_rotation<T: Real>(
    w: &PowerSeries<T>,
    tau: T,
    theta: T,
) -> Result<SchwarzianPair<T>> {
    if w.coeff(0).norm() > lit(1e-12) || (w.coeff(1) - cone::<T>()).norm() > lit(1e-12) {
        return Err(Error::Precondition("need w(0) = 0 and w'(0) = 1".into()));
    }
    let post = cis(-theta);
    let c: Vec<Complex<T>> = w
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| post * a * cis(tau * cnt(k)))
        .collect();
    let rotated = PowerSeries::from_vec_unchecked(c, w.radius_hint());
    let phi = schwarzian_of(&rotated)?;
    let base = schwarzian_of(w)?;
    // rounding in the rotated coefficients grows roughly like k max_{j<=k} |S_j|
    let mut scale = T::one();
    for k in 0..=phi.degree() {
        let want = base.coeff(k) * cis(tau * cnt(k + 2));
        scale = scale.max(want.norm());
        let defect = (phi.coeff(k) - want).norm();
        if defect > lit::<T>(1e-9) * cnt::<T>(k + 1) * scale {
            return Err(Error::SolverInconsistency(format!(
                "Schwarzian rotation rule off by {:.3e} at degree {k}",
                to_f64(defect)
            )));
        }
    }
    Ok(SchwarzianPair {
        w: rotated,
        phi,
        theta,
        tau,
    })
}

/// `sup (1 - |z|^2)^2 |phi(z)|` on a polar grid refined near the maximum.
pub fn schwarzian_norm<T: Real>(phi: &PowerSeries<T>) -> T {
    let rings = 64;
    let angles = 256;
    let weight = |z: Complex<T>| {
        let s = T::one() - z.norm_sqr();
        s * s * phi.horner(z).norm()
    };
    let mut best = (T::zero(), T::zero(), T::zero());
    for i in 0..rings {
        let r = cnt::<T>(i) / cnt(rings);
        for k in 0..angles {
            let t = T::TAU() * cnt::<T>(k) / cnt(angles);
            let v = weight(Complex::from_polar(r, t));
            if v > best.0 {
                best = (v, r, t);
            }
        }
    }
    // coordinate refinement around the grid maximum
    let (mut v, mut r, mut t) = best;
    let mut hr = T::one() / cnt(rings);
    let mut ht = T::TAU() / cnt(angles);
    for _ in 0..60 {
        let mut moved = false;
        for (dr, dt) in [
            (hr, T::zero()),
            (-hr, T::zero()),
            (T::zero(), ht),
            (T::zero(), -ht),
        ] {
            let rr = (r + dr).max(T::zero()).min(T::one());
            let cand = weight(Complex::from_polar(rr, t + dt));
            if cand > v {
                v = cand;
                r = rr;
                t = t + dt;
                moved = true;
            }
        }
        if !moved {
            hr = hr * lit(0.5);
            ht = ht * lit(0.5);
        }
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringOptions {
    /// Radius of the boundary circle; `None` takes `10^{-10/N}` for degree `N`, capped at 0.999.
    pub radius: Option<f64>,
    pub samples: usize,
    pub tol: f64,
}

impl Default for CoveringOptions {
    fn default() -> Self {
        Self {
            radius: None,
            samples: COVERING_SAMPLES,
            tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    /// `sup |a_2|` over the family; 0 means the bound below is vacuous.
    pub a2_max: f64,
    /// `1/(2 a2_max)`, absent when `a2_max = 0`.
    pub bound: Option<f64>,
    /// Smallest covered radius over the family.
    pub min_omitted_modulus: f64,
    /// Covered radius of each member: `min |w|` on its boundary circle.
    pub radii: Vec<f64>,
    pub holds: bool,
}

fn covering_radius<T: Real>(w: &PowerSeries<T>) -> T {
    lit::<T>(10.0)
        .powf(lit::<T>(-10.0) / cnt(w.degree().max(1)))
        .min(lit(0.999))
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Checks that the closed polygon is simple, using a uniform grid of buckets.
fn polygon_is_simple(pts: &[[f64; 2]]) -> Option<(usize, usize)> {
    let n = pts.len();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let cells = 64usize;
    let span = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
    let cell = |x: f64, a: usize| (((x - lo[a]) / span[a] * cells as f64) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let (x0, x1) = (cell(p[0].min(q[0]), 0), cell(p[0].max(q[0]), 0));
        let (y0, y1) = (cell(p[1].min(q[1]), 1), cell(p[1].max(q[1]), 1));
        for x in x0..=x1 {
            for y in y0..=y1 {
                buckets[x * cells + y].push(i);
            }
        }
    }
    for b in &buckets {
        for (ii, &i) in b.iter().enumerate() {
            for &j in &b[ii + 1..] {
                let adjacent =
                    j == i + 1 || i == j + 1 || (i == 0 && j == n - 1) || (j == 0 && i == n - 1);
                if !adjacent && segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

/// Necessary-condition filter: two well-separated points of a 64 x 64 polar grid
/// with (nearly) the same image.
fn grid_collision<T: Real>(w: &PowerSeries<T>, r: T) -> Option<(f64, f64)> {
    let mut pts = Vec::with_capacity(64 * 64);
    for i in 1..=64 {
        let rad = r * cnt::<T>(i) / lit(64.0);
        for k in 0..64 {
            let z = Complex::from_polar(rad, T::TAU() * cnt::<T>(k) / lit(64.0));
            pts.push((z, w.horner(z)));
        }
    }
    let scale = pts.iter().fold(T::zero(), |a, p| a.max(p.1.norm()));
    let tiny = scale * lit(1e-12);
    let sep = r / lit(128.0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if (pts[i].1 - pts[j].1).norm() < tiny && (pts[i].0 - pts[j].0).norm() > sep {
                return Some((to_f64(pts[i].0.norm()), to_f64(pts[j].0.norm())));
            }
        }
    }
    None
}

/// Covered radius of one member with the injectivity checks on its boundary circle.
fn member_radius<T: Real>(index: usize, w: &PowerSeries<T>, opts: &CoveringOptions) -> Result<T> {
    if w.coeff(0).norm() > lit(1e-12) || (w.coeff(1) - cone::<T>()).norm() > lit(1e-12) {
        return Err(Error::Precondition(format!(
            "family member {index} is not normalized by w(0) = 0, w'(0) = 1"
        )));
    }
    let r = opts
        .radius
        .map(lit::<T>)
        .unwrap_or_else(|| covering_radius(w));
    let m = opts.samples.next_power_of_two();
    let samples = w.sample_circle(r, m).values;
    let pts: Vec<[f64; 2]> = samples
        .iter()
        .map(|v| [to_f64(v.re), to_f64(v.im)])
        .collect();
    // winding of the boundary about 0 counts the zeros of w inside
    let mut turn = 0.0;
    for i in 0..m {
        let (a, b) = (samples[i], samples[(i + 1) % m]);
        turn += to_f64((b / a).arg());
    }
    let winding = (turn / std::f64::consts::TAU).round() as i64;
    if winding != 1 {
        return Err(Error::NonInjective {
            index,
            detail: format!("boundary winds {winding} times about 0"),
        });
    }
    if let Some((i, j)) = polygon_is_simple(&pts) {
        return Err(Error::NonInjective {
            index,
            detail: format!("boundary edges {i} and {j} cross"),
        });
    }
    if let Some((ri, rj)) = grid_collision(w, r) {
        return Err(Error::NonInjective {
            index,
            detail: format!("grid points at radii {ri:.4} and {rj:.4} share an image"),
        });
    }
    let (k, _) = samples
        .iter()
        .enumerate()
        .fold((0, T::infinity()), |best, (k, v)| {
            if v.norm() < best.1 {
                (k, v.norm())
            } else {
                best
            }
        });
    // golden-section search on the bracketing arc
    let h = T::TAU() / cnt(m);
    let mut a = h * cnt::<T>(k) - h;
    let mut b = h * cnt::<T>(k) + h;
    let g = lit::<T>(0.618_033_988_749_894_8);
    let modulus = |t: T| w.horner(Complex::from_polar(r, t)).norm();
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..80 {
        if modulus(c) < modulus(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    Ok(modulus((a + b) * lit(0.5)).min(samples[k].norm()))
}

/// `a2_max = sup |a_2|` over the family and the smallest disk about 0 covered by the
/// members; `holds` means every member covers `|w| < 1/(2 a2_max)` up to `tol`.
pub fn covering_check<T: Real>(
    family: &[PowerSeries<T>],
    opts: &CoveringOptions,
) -> Result<CoveringReport> {
    if family.is_empty() {
        return Err(Error::Domain("empty family".into()));
    }
    let a2_max = family
        .iter()
        .fold(0.0f64, |m, w| m.max(to_f64(w.coeff(2).norm())));
    let radii = family
        .iter()
        .enumerate()
        .map(|(i, w)| member_radius(i, w, opts).map(to_f64))
        .collect::<Result<Vec<f64>>>()?;
    let min_r = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let bound = (a2_max > 0.0).then(|| 1.0 / (2.0 * a2_max));
    let holds = bound.is_none_or(|b| min_r >= b - opts.tol);
    Ok(CoveringReport {
        a2_max,
        bound,
        min_omitted_modulus: min_r,
        radii,
        holds,
    })
}

/// Truncated Koebe function `z / (1 - z)^2 = sum n z^n`.
pub fn koebe<T: Real>(degree: usize) -> PowerSeries<T> {
    let c = (0..=degree)
        .map(|n| Complex::new(cnt::<T>(n), T::zero()))
        .collect();
    PowerSeries::from_vec_unchecked(c, lit(0.999))
}
