//! Neumann-series solution of the Beltrami equation and the resulting map
//! `h(w) = w + T rho(w)`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cnt, czero, lit, to_f64, Real};

use super::density::{AnnulusSpec, LaurentDensity};
use super::ops::{beurling_pi_annulus, cauchy_t_density, inner_coefficients, pair_with_basis};

/// Default sup-norm cap on Beltrami coefficients.
pub const DEFAULT_MU_CAP: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeumannOptions<T> {
    /// Stop once successive iterates differ by less than this in `L^2(G_R)`.
    pub tol: T,
    pub kmax: usize,
    pub mu_cap: T,
}

impl<T: Real> Default for NeumannOptions<T> {
    fn default() -> Self {
        Self {
            tol: lit(1e-12),
            kmax: 60,
            mu_cap: lit(DEFAULT_MU_CAP),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeumannSolution<T> {
    pub rho: LaurentDensity<T>,
    pub iterations: usize,
    pub converged: bool,
    /// `L^2` distance between successive iterates.
    pub increments: Vec<f64>,
    /// `L^2` norm of `rho - mu - mu Pi rho`.
    pub residual: f64,
    pub mu_sup: f64,
}

fn neumann_step<T: Real>(
    mu: &LaurentDensity<T>,
    rho: &LaurentDensity<T>,
    prune: T,
) -> Result<LaurentDensity<T>> {
    let pi = beurling_pi_annulus(rho).pruned(prune);
    Ok(mu.try_add(&mu.try_mul(&pi)?)?.pruned(prune))
}

/// Iterates `rho <- mu + mu Pi rho` from `rho = mu`.
pub fn neumann_solve<T: Real>(
    mu: &LaurentDensity<T>,
    opts: &NeumannOptions<T>,
) -> Result<NeumannSolution<T>> {
    let mu_sup = mu.sup_norm();
    if mu_sup >= opts.mu_cap {
        return Err(Error::BudgetExceeded {
            sup: to_f64(mu_sup),
            cap: to_f64(opts.mu_cap),
        });
    }
    let prune = opts.tol * lit(1e-4);
    let mut rho = mu.clone();
    let mut increments = Vec::new();
    for k in 1..=opts.kmax {
        let next = neumann_step(mu, &rho, prune)?;
        let inc = next.try_sub(&rho)?.l2_norm();
        increments.push(to_f64(inc));
        rho = next;
        if inc < opts.tol {
            let check = neumann_step(mu, &rho, prune)?;
            let residual = to_f64(check.try_sub(&rho)?.l2_norm());
            return Ok(NeumannSolution {
                rho,
                iterations: k,
                converged: true,
                increments,
                residual,
                mu_sup: to_f64(mu_sup),
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.kmax,
        residual: increments.last().copied().unwrap_or(f64::NAN),
        trace: increments,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapResiduals {
    /// `max |∂̄h - mu ∂h|` on the annulus verification grid.
    pub beltrami: f64,
    /// `max |∂̄h|` on the disk `|w - c0| <= 0.9 R`.
    pub conformal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderSample {
    pub w: [f64; 2],
    pub omega: [f64; 2],
}

/// `h(w) = w + sum_k <mu, phi_k> (w - c0)^k + omega(w)` on the conformal disk, and
/// `h = w + T rho` everywhere.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct MapRepresentation<T> {
    pub annulus: AnnulusSpec<T>,
    /// `t_k = <rho, phi_k>`: the exact Taylor coefficients of `h - w` at `c0`.
    pub coeffs: Vec<Complex<T>>,
    /// `<mu, phi_k>`: the first-order part.
    pub laurent_coeffs: Vec<Complex<T>>,
    pub remainder_grid: Vec<RemainderSample>,
    pub residuals: MapResiduals,
    pub mu: LaurentDensity<T>,
    #[serde(skip)]
    pub rho: LaurentDensity<T>,
    #[serde(skip)]
    t_density: LaurentDensity<T>,
}

/// Weights of the sixth-order central difference.
const FD6: [(f64, f64); 6] = [
    (-3.0, -1.0 / 60.0),
    (-2.0, 9.0 / 60.0),
    (-1.0, -45.0 / 60.0),
    (1.0, 45.0 / 60.0),
    (2.0, -9.0 / 60.0),
    (3.0, 1.0 / 60.0),
];

pub const FD_STEP: f64 = 1e-3;

/// `(∂f, ∂̄f)` by sixth-order central differences in `x` and `y`.
pub fn wirtinger_fd<T: Real>(
    f: impl Fn(Complex<T>) -> Result<Complex<T>>,
    w: Complex<T>,
    h: T,
) -> Result<(Complex<T>, Complex<T>)> {
    let mut dx = czero::<T>();
    let mut dy = czero::<T>();
    for (s, c) in FD6 {
        let step = h * lit(s);
        dx = dx + f(w + Complex::new(step, T::zero()))? * lit::<T>(c);
        dy = dy + f(w + Complex::new(T::zero(), step))? * lit::<T>(c);
    }
    dx = dx / h;
    dy = dy / h;
    let i = Complex::new(T::zero(), T::one());
    let half = lit::<T>(0.5);
    Ok(((dx - i * dy) * half, (dx + i * dy) * half))
}

impl<T: Real> MapRepresentation<T> {
    /// `h(w)`. Errors inside the boundary bands of the annulus.
    pub fn eval(&self, w: Complex<T>) -> Result<Complex<T>> {
        Ok(w + self.displacement(w)?)
    }

    /// `h(w) - w = T rho(w)`.
    pub fn displacement(&self, w: Complex<T>) -> Result<Complex<T>> {
        let ann = &self.annulus;
        let s = (w - ann.c0).norm();
        let band = lit::<T>(super::ops::BOUNDARY_BAND);
        if (s - ann.inner()).abs() < band || (s - ann.outer()).abs() < band {
            return Err(Error::BoundaryBand {
                re: to_f64(w.re),
                im: to_f64(w.im),
            });
        }
        if s < ann.inner() {
            let v = w - ann.c0;
            Ok(self
                .coeffs
                .iter()
                .rev()
                .fold(czero(), |acc, &c| acc * v + c))
        } else if s > ann.outer() {
            super::ops::cauchy_t(&self.rho, w)
        } else {
            Ok(self.t_density.eval_formula(w))
        }
    }

    /// `omega(w) = h(w) - w - sum_k <mu, phi_k> v^k` on the conformal disk.
    pub fn remainder(&self, w: Complex<T>) -> Complex<T> {
        let v = w - self.annulus.c0;
        let n = self.coeffs.len().max(self.laurent_coeffs.len());
        (0..n).rev().fold(czero(), |acc, k| {
            let a = self.coeffs.get(k).copied().unwrap_or_else(czero);
            let b = self.laurent_coeffs.get(k).copied().unwrap_or_else(czero);
            acc * v + (a - b)
        })
    }

    /// Max of `|omega|` over the stored remainder grid.
    pub fn remainder_sup(&self) -> f64 {
        self.remainder_grid
            .iter()
            .map(|s| s.omega[0].hypot(s.omega[1]))
            .fold(0.0, f64::max)
    }

    /// `max |∂̄h|` at the given points, by finite differences.
    pub fn dbar_residual(&self, points: &[Complex<T>]) -> Result<f64> {
        let h = lit::<T>(FD_STEP);
        let mut worst = 0.0f64;
        for &w in points {
            let (_, dbar) = wirtinger_fd(|x| self.displacement(x), w, h)?;
            worst = worst.max(to_f64(dbar.norm()));
        }
        Ok(worst)
    }
}

fn disk_grid<T: Real>(
    center: Complex<T>,
    radius: T,
    rings: usize,
    angles: usize,
) -> Vec<Complex<T>> {
    let mut pts = vec![center];
    for i in 1..=rings {
        let r = radius * cnt::<T>(i) / cnt(rings);
        for k in 0..angles {
            let t = T::TAU() * cnt::<T>(k) / cnt(angles);
            pts.push(center + Complex::from_polar(r, t));
        }
    }
    pts
}

/// Assembles `h = id + T rho`, extracts coefficients and checks both residuals
/// against `10 tol`.
pub fn build_map<T: Real>(
    rho: &LaurentDensity<T>,
    mu: &LaurentDensity<T>,
    tol: T,
) -> Result<MapRepresentation<T>> {
    if rho.annulus != mu.annulus {
        return Err(Error::AnnulusMismatch);
    }
    let annulus = rho.annulus;
    let coeffs = inner_coefficients(rho);
    let kmax = mu.max_frequency().unwrap_or(0).max(0) as usize;
    let laurent_coeffs: Vec<Complex<T>> = (0..kmax).map(|k| pair_with_basis(mu, k)).collect();
    let mut map = MapRepresentation {
        annulus,
        coeffs,
        laurent_coeffs,
        remainder_grid: Vec::new(),
        residuals: MapResiduals {
            beltrami: 0.0,
            conformal: 0.0,
        },
        mu: mu.clone(),
        rho: rho.clone(),
        t_density: cauchy_t_density(rho),
    };
    let d0 = disk_grid(annulus.c0, annulus.inner() * lit(0.9), 8, 32);
    map.remainder_grid = d0
        .iter()
        .map(|&w| {
            let o = map.remainder(w);
            RemainderSample {
                w: [to_f64(w.re), to_f64(w.im)],
                omega: [to_f64(o.re), to_f64(o.im)],
            }
        })
        .collect();
    map.residuals.conformal = map.dbar_residual(&d0)?;
    let h = lit::<T>(FD_STEP);
    let mut beltrami = 0.0f64;
    for i in 1..=9 {
        let r = annulus.inner() + cnt::<T>(i) / lit(10.0);
        for k in 0..64 {
            let t = T::TAU() * cnt::<T>(k) / lit(64.0);
            let w = annulus.c0 + Complex::from_polar(r, t);
            let (d, dbar) = wirtinger_fd(|x| Ok(map.t_density.eval_formula(x)), w, h)?;
            let res = dbar - mu.eval_formula(w) * (Complex::new(T::one(), T::zero()) + d);
            beltrami = beltrami.max(to_f64(res.norm()));
        }
    }
    map.residuals.beltrami = beltrami;
    let limit = 10.0 * to_f64(tol);
    if beltrami > limit || map.residuals.conformal > limit {
        return Err(Error::SolverInconsistency(format!(
            "Beltrami residual {beltrami:.3e}, conformal residual {:.3e}, limit {limit:.3e}",
            map.residuals.conformal
        )));
    }
    Ok(map)
}
