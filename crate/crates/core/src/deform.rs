//! Coefficient-targeted quasiconformal deformation of a zero-free function.
//!
//! Given `f` and shifts `d_j..d_n`, find `mu = sum_k xi_k conj(phi_k) + tau conj(psi)`
//! on the annulus around `c0 = f(0)` such that `f* = h∘f`, with `h` the normalized
//! solution of `∂̄h = mu ∂h`, has `c_k(f*) = c_k(f) + d_k` and area integral
//! `∬_D |f*|^p = ∬_D |f|^p + a`. Since `f(D)` lies in the disk where `h` is
//! conformal, `f* = f + sum_k t_k (f - c0)^k` with `t_k = <rho, phi_k>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Contract, Error, Result};
use crate::integral::density::{AnnulusSpec, LaurentDensity, Monomial};
use crate::integral::ops::{gram_r2, inner_coefficients};
use crate::integral::phi::{
    minimal_radius, phi_functional, PhiData, B_ZERO_TOL, DEFAULT_PSI_ORDER,
};
use crate::integral::solve::{
    build_map, neumann_solve, wirtinger_fd, MapRepresentation, NeumannOptions, FD_STEP,
};
use crate::norms::hardy_norm;
use crate::quadrature::DiskQuadrature;
use crate::scalar::{cnt, cone, czero, lit, to_f64, Real};
use crate::series::PowerSeries;

/// Default sup-norm cap on the deformation's Beltrami coefficient. Shifting `c_n` by `d`
/// alone needs roughly `sup|mu| >= (n-1)|d| / (2 |c_1|^n (R^{1-n} - (R+1)^{1-n}))`, which
/// passes 0.1 already for moderate targets on the smallest admissible annulus.
pub const DEFORM_MU_CAP: f64 = 0.5;

/// Default truncation degree of `f*`.
pub const DEFAULT_OUTPUT_DEGREE: usize = 128;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct DeformationProblem<T> {
    pub f: PowerSeries<T>,
    pub p: T,
    pub n: usize,
    /// First targeted index; `None` picks the first `k` with `d_k != 0`.
    #[serde(default)]
    pub j: Option<usize>,
    /// `d_0..d_n`; entries below `j` are ignored.
    pub d: Vec<Complex<T>>,
    /// Requested change of `∬_D |f|^p dx dy`.
    #[serde(default)]
    pub a: T,
    pub eps_budget: T,
    /// Defaults to center `f(0)` and the smallest admissible `R`.
    #[serde(default)]
    pub annulus: Option<AnnulusSpec<T>>,
    pub psi_order: usize,
    pub mu_cap: T,
    pub output_degree: usize,
}

impl<T: Real> DeformationProblem<T> {
    /// Problem with `j = 0`, `a = 0` and default policies.
    pub fn new(f: PowerSeries<T>, p: T, n: usize, d: Vec<Complex<T>>, eps_budget: T) -> Self {
        let output_degree = DEFAULT_OUTPUT_DEGREE.max(f.degree());
        Self {
            f,
            p,
            n,
            j: None,
            d,
            a: T::zero(),
            eps_budget,
            annulus: None,
            psi_order: DEFAULT_PSI_ORDER,
            mu_cap: lit(DEFORM_MU_CAP),
            output_degree,
        }
    }

    /// The first targeted index in effect.
    pub fn first_index(&self) -> usize {
        self.j.unwrap_or_else(|| {
            self.d
                .iter()
                .position(|c| c.norm() > T::zero())
                .unwrap_or(self.n)
                .min(self.n)
        })
    }

    /// `max(|d|, |a|)`, the size of the request.
    pub fn target_size(&self) -> T {
        let d = self
            .d
            .iter()
            .skip(self.first_index())
            .fold(T::zero(), |s, c| s + c.norm_sqr())
            .sqrt();
        d.max(self.a.abs())
    }

    pub fn resolved_annulus(&self) -> Result<AnnulusSpec<T>> {
        match self.annulus {
            Some(a) => Ok(a),
            None => {
                let c0 = self.f.coeff(0);
                AnnulusSpec::new(c0, minimal_radius(&self.f, c0))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > T::one()) {
            return Err(Error::Domain(format!("need p > 1, got {}", to_f64(self.p))));
        }
        if self.n < 1 || self.j.is_some_and(|j| j > self.n) {
            return Err(Error::Domain("need n >= 1 and j <= n".into()));
        }
        if self.d.len() != self.n + 1 {
            return Err(Error::Domain(format!(
                "expected {} target shifts d_0..d_n, got {}",
                self.n + 1,
                self.d.len()
            )));
        }
        if self.output_degree < self.f.degree() {
            return Err(Error::Domain("output degree below input degree".into()));
        }
        let d_norm = self
            .d
            .iter()
            .skip(self.first_index())
            .fold(T::zero(), |s, c| s + c.norm_sqr())
            .sqrt();
        if d_norm > self.eps_budget || self.a.abs() > self.eps_budget {
            return Err(Error::TargetBudget(format!(
                "|d| = {:.3e}, |a| = {:.3e}, budget {:.3e}",
                to_f64(d_norm),
                to_f64(self.a.abs()),
                to_f64(self.eps_budget)
            )));
        }
        Ok(())
    }
}

/// `y = (Re d_j, Im d_j, ..., Re d_n, Im d_n, a)`.
pub fn assemble_targets<T: Real>(problem: &DeformationProblem<T>) -> Vec<f64> {
    let mut y = Vec::with_capacity(2 * (problem.n - problem.first_index()) + 3);
    for k in problem.first_index()..=problem.n {
        let dk = problem.d.get(k).copied().unwrap_or_else(czero);
        y.push(to_f64(dk.re));
        y.push(to_f64(dk.im));
    }
    y.push(to_f64(problem.a));
    y
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformOptions<T> {
    /// Max-norm tolerance on `W(x) - y`.
    pub tol: T,
    pub max_iter: usize,
    pub neumann: NeumannOptions<T>,
    /// Relative finite-difference step of a Jacobian refresh.
    pub fd_step: f64,
    /// Step-norm contraction above which the Jacobian is refreshed.
    pub refresh_ratio: f64,
}

impl<T: Real> Default for DeformOptions<T> {
    fn default() -> Self {
        Self {
            tol: lit(1e-10),
            max_iter: 20,
            neumann: NeumannOptions {
                tol: lit(1e-13),
                ..NeumannOptions::default()
            },
            fd_step: 1e-6,
            refresh_ratio: 0.5,
        }
    }
}

/// Everything about a problem that does not depend on the unknowns.
#[derive(Clone, Debug)]
pub struct DeformContext<T> {
    pub problem: DeformationProblem<T>,
    /// First targeted index.
    pub j: usize,
    pub annulus: AnnulusSpec<T>,
    pub phi: PhiData<T>,
    /// `conj(psi)` as a density.
    pub psi_conj: LaurentDensity<T>,
    /// `f - c0` at the output degree.
    pub g: PowerSeries<T>,
    f_out: PowerSeries<T>,
    quad: DiskQuadrature<T>,
    area0: T,
    /// Least upper bound on `|f - c0|` over the disk.
    sup_g: T,
    neumann: NeumannOptions<T>,
}

impl<T: Real> DeformContext<T> {
    pub fn new(problem: &DeformationProblem<T>, opts: &DeformOptions<T>) -> Result<Self> {
        problem.validate()?;
        let f = &problem.f;
        if f.is_zero() {
            return Err(Error::ZeroSeries);
        }
        let zeros = f.is_nonvanishing(lit(0.999))?;
        if !zeros.nonvanishing {
            return Err(Error::Vanishing {
                radius: 0.999,
                winding: zeros.winding,
            });
        }
        if !(problem.n + 1..=f.degree()).any(|k| f.coeff(k).norm() > lit(1e-12)) {
            return Err(Error::Precondition(format!(
                "f is a polynomial of degree <= n = {}",
                problem.n
            )));
        }
        if problem.n >= 1 && f.coeff(1).norm() < lit(1e-12) {
            return Err(Error::ProblemStructure(
                "c_1(f) = 0: the coefficient map is singular at the identity".into(),
            ));
        }
        let annulus = problem.resolved_annulus()?;
        if (annulus.c0 - f.coeff(0)).norm() > lit::<T>(1e-14) * (T::one() + annulus.c0.norm()) {
            return Err(Error::Precondition("annulus center must be f(0)".into()));
        }
        let phi = phi_functional(f, problem.p, annulus, problem.psi_order.max(problem.n))?;
        if phi.b[problem.first_index()].norm() < lit(B_ZERO_TOL) {
            return Err(Error::ProblemStructure(format!(
                "b_{} vanishes",
                problem.first_index()
            )));
        }
        let psi_conj = phi.psi(problem.first_index()..=problem.n).conj();
        if psi_conj.is_empty() {
            return Err(Error::ProblemStructure("psi vanishes identically".into()));
        }
        let deg = problem.output_degree;
        let f_out = f.resized(deg);
        let mut g = f_out.clone();
        let mut c = g.coeffs().to_vec();
        c[0] = czero();
        g = PowerSeries::from_vec_unchecked(c, f.radius_hint());
        let quad = DiskQuadrature::<T>::for_degree(deg);
        let area0 = quad.area_power_integral(&f_out, problem.p);
        let sup_g = phi.sup_shift;
        Ok(Self {
            problem: problem.clone(),
            j: problem.first_index(),
            annulus,
            phi,
            psi_conj,
            g,
            f_out,
            quad,
            area0,
            sup_g,
            neumann: NeumannOptions {
                mu_cap: problem.mu_cap,
                ..opts.neumann
            },
        })
    }

    pub fn unknowns(&self) -> usize {
        2 * (self.problem.n - self.j) + 3
    }

    /// Splits `x` into `xi_j..xi_n` and `tau`.
    pub fn split(&self, x: &[f64]) -> (Vec<Complex<T>>, T) {
        let m = self.problem.n - self.j + 1;
        let xi = (0..m)
            .map(|i| Complex::new(lit(x[2 * i]), lit(x[2 * i + 1])))
            .collect();
        (xi, lit(x[2 * m]))
    }

    pub fn join(&self, xi: &[Complex<T>], tau: T) -> Vec<f64> {
        let mut x: Vec<f64> = xi
            .iter()
            .flat_map(|c| [to_f64(c.re), to_f64(c.im)])
            .collect();
        x.push(to_f64(tau));
        x
    }

    /// `mu = sum_k xi_k conj(phi_k) + tau conj(psi)`.
    pub fn ansatz_mu(&self, xi: &[Complex<T>], tau: T) -> LaurentDensity<T> {
        let mut mu = self.psi_conj.scale(Complex::new(tau, T::zero()));
        for (i, &x) in xi.iter().enumerate() {
            let k = (self.j + i) as i32;
            mu.add_term(Monomial::new(0, -k - 1, 0), x);
        }
        mu
    }

    /// `f + sum_k t_k g^k` at the output degree; negligible terms skipped.
    pub fn compose(&self, t: &[Complex<T>]) -> PowerSeries<T> {
        let deg = self.problem.output_degree;
        let mut last = 0;
        for (k, tk) in t.iter().enumerate() {
            if tk.norm() * self.sup_g.powi(k as i32) > lit(1e-18) {
                last = k + 1;
            }
        }
        if last == 0 {
            return self.f_out.clone();
        }
        let poly = PowerSeries::from_vec_unchecked(t[..last].to_vec(), self.f_out.radius_hint());
        let shift = poly
            .compose(&self.g)
            .expect("g(0) = 0 by construction")
            .resized(deg);
        &self.f_out + &shift
    }

    pub fn area_integral(&self, f: &PowerSeries<T>) -> T {
        self.quad.area_power_integral(f, self.problem.p)
    }

    fn measure(&self, f_star: &PowerSeries<T>) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.unknowns());
        for k in self.j..=self.problem.n {
            let dk = f_star.coeff(k) - self.f_out.coeff(k);
            y.push(to_f64(dk.re));
            y.push(to_f64(dk.im));
        }
        y.push(to_f64(self.area_integral(f_star) - self.area0));
        y
    }

    /// Full nonlinear evaluation of `x -> y`.
    pub fn forward(&self, x: &[f64]) -> Result<ForwardEval<T>> {
        let (xi, tau) = self.split(x);
        let mu = self.ansatz_mu(&xi, tau);
        let sol = neumann_solve(&mu, &self.neumann)?;
        let t = inner_coefficients(&sol.rho);
        let f_star = self.compose(&t);
        let y = self.measure(&f_star);
        Ok(ForwardEval {
            y,
            mu,
            rho: sol.rho,
            f_star,
            neumann_iterations: sol.iterations,
            mu_sup: sol.mu_sup,
        })
    }

    /// Jacobian of `forward` at `x = 0`, from `t_k = <mu, phi_k> = -r_k^2 (coefficient of conj(phi_k))`.
    pub fn linearization(&self) -> DMatrix<f64> {
        let m = self.unknowns();
        let mut jac = DMatrix::zeros(m, m);
        let p = &self.problem;
        let half_p = p.p / lit(2.0);
        let weight_rings = self.weights();
        let column = |t: &[(usize, Complex<T>)]| -> Vec<f64> {
            let mut delta = PowerSeries::zeros(p.output_degree);
            for &(k, tk) in t {
                let gk = self.g.powu(k);
                delta = &delta + &gk.scale(tk);
            }
            let mut col = Vec::with_capacity(m);
            for i in self.j..=p.n {
                let c = delta.coeff(i);
                col.push(to_f64(c.re));
                col.push(to_f64(c.im));
            }
            // dN = 2 Re ∬ (p/2) |f|^{p-2} conj(f) delta
            let rings = self.quad.sample(&delta);
            let dn = self
                .quad
                .integrate_rings(rings.len(), |i, k| (weight_rings[i][k] * rings[i][k]).re)
                * lit(2.0)
                * half_p;
            col.push(to_f64(dn));
            col
        };
        for (i, k) in (self.j..=p.n).enumerate() {
            let r2 = gram_r2(k, &self.annulus);
            let re = column(&[(k, Complex::new(-r2, T::zero()))]);
            let im = column(&[(k, Complex::new(T::zero(), -r2))]);
            for row in 0..m {
                jac[(row, 2 * i)] = re[row];
                jac[(row, 2 * i + 1)] = im[row];
            }
        }
        let tau_terms: Vec<(usize, Complex<T>)> = self
            .psi_conj
            .terms()
            .map(|(mono, c)| {
                let k = (-mono.b - 1) as usize;
                (k, *c * (-gram_r2(k, &self.annulus)))
            })
            .collect();
        let col = column(&tau_terms);
        for row in 0..m {
            jac[(row, m - 1)] = col[row];
        }
        jac
    }

    /// `|f|^{p-2} conj(f)` on the quadrature grid.
    fn weights(&self) -> Vec<Vec<Complex<T>>> {
        let rings = self.quad.sample(&self.f_out);
        rings
            .into_iter()
            .map(|ring| {
                ring.into_iter()
                    .map(|v| v.conj() * v.norm().powf(self.problem.p - lit(2.0)))
                    .collect()
            })
            .collect()
    }

    /// `-2 sum_k r_k^2 |b_k|^2` over the indices carried by `psi`.
    pub fn kappa(&self) -> T {
        self.psi_conj
            .terms()
            .map(|(mono, c)| {
                let k = (-mono.b - 1) as usize;
                gram_r2(k, &self.annulus) * c.norm_sqr()
            })
            .fold(T::zero(), |a, v| a + v)
            * lit(-2.0)
    }
}

#[derive(Clone, Debug)]
pub struct ForwardEval<T> {
    pub y: Vec<f64>,
    pub mu: LaurentDensity<T>,
    pub rho: LaurentDensity<T>,
    pub f_star: PowerSeries<T>,
    pub neumann_iterations: usize,
    pub mu_sup: f64,
}

/// `W(x)` for a problem, building the context on the fly.
pub fn forward_map_w<T: Real>(x: &[f64], problem: &DeformationProblem<T>) -> Result<Vec<f64>> {
    let ctx = DeformContext::new(problem, &DeformOptions::default())?;
    Ok(ctx.forward(x)?.y)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeformDiagnostics {
    /// `|c_k(f*) - c_k(f) - d_k|` for `k = j..n`.
    pub coeff_residuals: Vec<f64>,
    pub area_norm_delta: f64,
    pub hardy_norm_delta: f64,
    pub newton_iterations: usize,
    pub jacobian_refreshes: usize,
    pub mu_sup_norm: f64,
    /// `max |W(x) - y|` after each Newton step, starting at `x = 0`.
    pub residual_trace: Vec<f64>,
    /// `-2 sum r_k^2 |b_k|^2`, the first-order area response to `tau`.
    pub kappa: f64,
    /// `xi_j b_j r_j^2 + sum_{k>j} xi_k b_k r_k^2`; zero when the targeted terms
    /// alone leave the area unchanged to first order.
    pub eq14_defect: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct DeformationResult<T> {
    pub xi: Vec<Complex<T>>,
    pub tau: T,
    pub mu: LaurentDensity<T>,
    pub h: MapRepresentation<T>,
    pub f_star: PowerSeries<T>,
    pub diagnostics: DeformDiagnostics,
    pub converged: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn residual(y: &[f64], target: &[f64]) -> Vec<f64> {
    y.iter().zip(target).map(|(a, b)| a - b).collect()
}

struct NewtonRun<T> {
    x: Vec<f64>,
    eval: ForwardEval<T>,
    trace: Vec<f64>,
    iterations: usize,
    refreshes: usize,
}

fn sub_lu(jac: &DMatrix<f64>, active: usize) -> nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn> {
    jac.view((0, 0), (active, active)).clone_owned().lu()
}

/// Chord Newton on the first `active` rows and unknowns; the rest of `x` stays at `x0`.
fn chord_newton<T: Real>(
    ctx: &DeformContext<T>,
    target: &[f64],
    x0: Vec<f64>,
    active: usize,
    opts: &DeformOptions<T>,
) -> Result<NewtonRun<T>> {
    let jac = ctx.linearization();
    let mut lu = sub_lu(&jac, active);
    if !lu.is_invertible() {
        return Err(Error::ProblemStructure(
            "linearized coefficient/area map is singular".into(),
        ));
    }
    let tol = to_f64(opts.tol);
    let mut x = x0;
    let mut eval = ctx.forward(&x)?;
    let mut res = residual(&eval.y[..active], &target[..active]);
    let mut trace = vec![max_abs(&res)];
    let mut prev_step = f64::INFINITY;
    let mut refreshes = 0;
    let mut iterations = 0;
    while max_abs(&res) >= tol {
        if iterations == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual: max_abs(&res),
                trace,
            });
        }
        let step = lu
            .solve(&DVector::from_vec(res.clone()))
            .ok_or_else(|| Error::SolverInconsistency("singular Jacobian".into()))?;
        for (xi, s) in x.iter_mut().zip(step.iter()) {
            *xi -= s;
        }
        iterations += 1;
        eval = ctx.forward(&x)?;
        res = residual(&eval.y[..active], &target[..active]);
        trace.push(max_abs(&res));
        let step_norm = step.amax();
        if step_norm > opts.refresh_ratio * prev_step && max_abs(&res) >= tol {
            let jac = finite_difference_jacobian(ctx, &x, &eval.y, opts.fd_step)?;
            lu = sub_lu(&jac, active);
            refreshes += 1;
        }
        prev_step = step_norm;
    }
    Ok(NewtonRun {
        x,
        eval,
        trace,
        iterations,
        refreshes,
    })
}

fn finish<T: Real>(
    ctx: &DeformContext<T>,
    run: NewtonRun<T>,
    converged: bool,
    opts: &DeformOptions<T>,
) -> Result<DeformationResult<T>> {
    let problem = &ctx.problem;
    let (xi, tau) = ctx.split(&run.x);
    let h = build_map(
        &run.eval.rho,
        &run.eval.mu,
        opts.neumann.tol.max(lit(1e-11)),
    )?;
    let f_star = run.eval.f_star;
    let coeff_residuals = (ctx.j..=problem.n)
        .map(|k| to_f64((f_star.coeff(k) - problem.f.coeff(k) - problem.d[k]).norm()))
        .collect();
    let area_norm_delta = to_f64(ctx.area_integral(&f_star) - ctx.area0);
    let hardy_norm_delta = to_f64(
        hardy_norm(&f_star, problem.p, T::one())?.value
            - hardy_norm(&problem.f, problem.p, T::one())?.value,
    );
    let mut eq14 = czero::<T>();
    for (i, &x) in xi.iter().enumerate() {
        let k = ctx.j + i;
        eq14 = eq14 + x * ctx.phi.b[k] * gram_r2(k, &ctx.annulus);
    }
    Ok(DeformationResult {
        xi,
        tau,
        mu: run.eval.mu,
        h,
        f_star,
        diagnostics: DeformDiagnostics {
            coeff_residuals,
            area_norm_delta,
            hardy_norm_delta,
            newton_iterations: run.iterations,
            jacobian_refreshes: run.refreshes,
            mu_sup_norm: run.eval.mu_sup,
            residual_trace: run.trace,
            kappa: to_f64(ctx.kappa()),
            eq14_defect: [to_f64(eq14.re), to_f64(eq14.im)],
        },
        converged,
    })
}

/// Chord Newton on `W(x) = y` starting from the linearization at the identity; the
/// Jacobian is refreshed by finite differences when the step stops contracting.
pub fn newton_deform<T: Real>(
    problem: &DeformationProblem<T>,
    opts: &DeformOptions<T>,
) -> Result<DeformationResult<T>> {
    let ctx = DeformContext::new(problem, opts)?;
    let target = assemble_targets(problem);
    let m = ctx.unknowns();
    let run = chord_newton(&ctx, &target, vec![0.0; m], m, opts)?;
    finish(&ctx, run, true, opts)
}

/// Solves the coefficient rows only, with `tau` pinned. The area row is left free, so
/// the result meets every contract except possibly the area one.
pub fn newton_deform_fixed_tau<T: Real>(
    problem: &DeformationProblem<T>,
    tau: T,
    opts: &DeformOptions<T>,
) -> Result<DeformationResult<T>> {
    let ctx = DeformContext::new(problem, opts)?;
    let target = assemble_targets(problem);
    let m = ctx.unknowns();
    let mut x0 = vec![0.0; m];
    x0[m - 1] = to_f64(tau);
    let run = chord_newton(&ctx, &target, x0, m - 1, opts)?;
    let converged = (run.eval.y[m - 1] - target[m - 1]).abs() < to_f64(opts.tol);
    finish(&ctx, run, converged, opts)
}

fn finite_difference_jacobian<T: Real>(
    ctx: &DeformContext<T>,
    x: &[f64],
    y: &[f64],
    rel: f64,
) -> Result<DMatrix<f64>> {
    let m = x.len();
    let scale = max_abs(x).max(1e-8);
    let mut jac = DMatrix::zeros(m, m);
    for c in 0..m {
        let h = rel * x[c].abs().max(1e-3 * scale);
        let mut xp = x.to_vec();
        xp[c] += h;
        let yp = ctx.forward(&xp)?.y;
        for r in 0..m {
            jac[(r, c)] = (yp[r] - y[r]) / h;
        }
    }
    Ok(jac)
}

/// Re-evaluates a deformation at given parameters, e.g. to replay a stored or edited result.
pub fn replay<T: Real>(
    problem: &DeformationProblem<T>,
    xi: &[Complex<T>],
    tau: T,
    opts: &DeformOptions<T>,
) -> Result<DeformationResult<T>> {
    let ctx = DeformContext::new(problem, opts)?;
    let x = ctx.join(xi, tau);
    let eval = ctx.forward(&x)?;
    let target = assemble_targets(problem);
    let res = max_abs(&residual(&eval.y, &target));
    let run = NewtonRun {
        x,
        eval,
        trace: vec![res],
        iterations: 0,
        refreshes: 0,
    };
    finish(&ctx, run, res < to_f64(opts.tol), opts)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyPolicy {
    pub coeff_tol: f64,
    /// Allowed `|delta N - a|` for the area integral, measured on a refined grid.
    pub area_tol: f64,
    /// Allowed `||f* - f||_{H^p} / eps`.
    pub hardy_slope_max: f64,
    pub conformal_tol: f64,
}

impl Default for VerifyPolicy {
    fn default() -> Self {
        Self {
            coeff_tol: 1e-9,
            area_tol: 1e-6,
            hardy_slope_max: 1e4,
            conformal_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub coefficient_residual: f64,
    pub area_delta: f64,
    pub hardy_delta: f64,
    /// `||f* - f||_{H^p}`, which bounds `|hardy_delta|`.
    pub hardy_shift: f64,
    pub conformal_residual: f64,
    pub winding: i64,
    /// Outcome of contracts 1 to 5 in order.
    pub passed: [bool; 5],
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.passed.iter().all(|&b| b)
    }

    pub fn first_failure(&self) -> Option<Contract> {
        const ORDER: [Contract; 5] = [
            Contract::Coefficients,
            Contract::AreaNorm,
            Contract::HardyNorm,
            Contract::Conformal,
            Contract::Nonvanishing,
        ];
        self.passed.iter().position(|&b| !b).map(|i| ORDER[i])
    }
}

/// Measures all five contracts of a deformation result.
pub fn check_deformation<T: Real>(
    result: &DeformationResult<T>,
    problem: &DeformationProblem<T>,
    policy: &VerifyPolicy,
) -> Result<VerificationReport> {
    let f = &problem.f;
    let fs = &result.f_star;
    let coefficient_residual = (problem.first_index()..=problem.n)
        .map(|k| to_f64((fs.coeff(k) - f.coeff(k) - problem.d[k]).norm()))
        .fold(0.0, f64::max);

    let deg = fs.degree();
    let fine =
        DiskQuadrature::<T>::new((2 * deg + 32).min(512), (8 * (deg + 1)).next_power_of_two());
    let area_delta = to_f64(
        fine.area_power_integral(fs, problem.p)
            - fine.area_power_integral(&f.resized(deg), problem.p),
    );
    let area_ok = (area_delta - to_f64(problem.a)).abs() <= policy.area_tol;

    let hardy_delta = to_f64(
        hardy_norm(fs, problem.p, T::one())?.value - hardy_norm(f, problem.p, T::one())?.value,
    );
    let shift = fs - &f.resized(deg);
    let hardy_shift = to_f64(hardy_norm(&shift, problem.p, T::one())?.value);
    let eps = to_f64(problem.target_size()).max(1e-300);
    let hardy_ok = hardy_delta.abs() <= hardy_shift * (1.0 + 1e-9) + 1e-14
        && hardy_shift <= policy.hardy_slope_max * eps;

    let ann = result.h.annulus;
    let mut conformal_residual = 0.0f64;
    let mut inside = true;
    let h = lit::<T>(FD_STEP);
    for i in 1..=4 {
        let r = cnt::<T>(i) / lit(4.0);
        let samples = f.sample_circle(r, 32);
        for &w in &samples.values {
            if (w - ann.c0).norm() + h * lit(3.0) >= ann.inner() {
                inside = false;
                continue;
            }
            let (_, dbar) = wirtinger_fd(|x| result.h.displacement(x), w, h)?;
            conformal_residual = conformal_residual.max(to_f64(dbar.norm()));
        }
    }
    let conformal_ok = inside && conformal_residual <= policy.conformal_tol;

    let (winding, nonvanishing) = match fs.is_nonvanishing(f.radius_hint()) {
        Ok(z) => (z.winding, z.nonvanishing),
        Err(_) => (-1, false),
    };

    Ok(VerificationReport {
        coefficient_residual,
        area_delta,
        hardy_delta,
        hardy_shift,
        conformal_residual,
        winding,
        passed: [
            coefficient_residual <= policy.coeff_tol,
            area_ok,
            hardy_ok,
            conformal_ok,
            nonvanishing,
        ],
    })
}

/// [`check_deformation`], failing with the first violated contract.
pub fn verify_deformation<T: Real>(
    result: &DeformationResult<T>,
    problem: &DeformationProblem<T>,
    policy: &VerifyPolicy,
) -> Result<VerificationReport> {
    let report = check_deformation(result, problem, policy)?;
    if let Some(contract) = report.first_failure() {
        let detail = match contract {
            Contract::Coefficients => format!("max residual {:.3e}", report.coefficient_residual),
            Contract::AreaNorm => format!(
                "area change {:.3e}, requested {:.3e}",
                report.area_delta,
                to_f64(problem.a)
            ),
            Contract::HardyNorm => format!(
                "hardy change {:.3e}, shift {:.3e}",
                report.hardy_delta, report.hardy_shift
            ),
            Contract::Conformal => format!("dbar residual {:.3e}", report.conformal_residual),
            Contract::Nonvanishing => format!("winding {}", report.winding),
        };
        return Err(Error::ContractViolation { contract, detail });
    }
    Ok(report)
}

/// First-order prediction of the normalized map with `w(0) = 0`, `w'(0) = 1`, `w(1) = 1`:
/// `w(z) = z - (z^2 (z - 1) / pi) ∬ mu / (zeta^2 (zeta - 1)(zeta - z))`.
///
/// In terms of `T mu = sum_k t_k z^k` this is `z + T mu(z) - t_0 - t_1 z - z^2 (T mu(1) - t_0 - t_1)`.
pub fn variational_predict<T: Real>(mu: &LaurentDensity<T>, z: Complex<T>) -> Result<Complex<T>> {
    let ann = mu.annulus;
    if ann.c0.norm() > T::zero() {
        return Err(Error::Domain(
            "variational formula needs the annulus centered at 0".into(),
        ));
    }
    if ann.inner() <= T::one() {
        return Err(Error::Domain("variational formula needs R > 1".into()));
    }
    if z.norm() > ann.inner() * lit(0.9) {
        return Err(Error::Domain(format!(
            "|z| = {} outside the validity radius 0.9 R",
            to_f64(z.norm())
        )));
    }
    let t = inner_coefficients(mu);
    let poly = |w: Complex<T>| t.iter().rev().fold(czero::<T>(), |acc, &c| acc * w + c);
    let t0 = t.first().copied().unwrap_or_else(czero);
    let t1 = t.get(1).copied().unwrap_or_else(czero);
    let one = cone::<T>();
    Ok(z + poly(z) - t0 - t1 * z - z * z * (poly(one) - t0 - t1))
}

/// The full map `h` renormalized by the Moebius map that sends `h(0) -> 0`, `h(1) -> 1`
/// and makes the derivative at 0 equal to 1.
pub fn renormalized_map<T: Real>(map: &MapRepresentation<T>, z: Complex<T>) -> Result<Complex<T>> {
    let h0 = map.eval(czero())?;
    let h1 = map.eval(cone())?;
    let d0 = cone::<T>() + map.coeffs.get(1).copied().unwrap_or_else(czero);
    let lambda = d0.inv();
    let sigma = (lambda * (h1 - h0) - cone()) / (h1 - h0);
    let u = map.eval(z)? - h0;
    Ok(lambda * u / (cone::<T>() + sigma * u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremals::{sample_nonvanishing, SampleStyle};

    type C = Complex<f64>;

    fn fixture() -> DeformationProblem<f64> {
        let f = sample_nonvanishing::<f64>(7, 2.0, SampleStyle::ExpOfSeries).unwrap();
        let mut d = vec![C::new(0.0, 0.0); 4];
        d[3] = C::new(0.0, 1e-3);
        DeformationProblem::new(f, 2.0, 3, d, 1e-2)
    }

    #[test]
    fn targets_dimension() {
        let p = fixture();
        assert_eq!(p.first_index(), 3);
        assert_eq!(assemble_targets(&p), vec![0.0, 1e-3, 0.0]);
        let mut q = p.clone();
        q.j = Some(1);
        let y = assemble_targets(&q);
        assert_eq!(y.len(), 2 * (3 - 1) + 3);
        assert_eq!(y[5], 1e-3);
    }

    #[test]
    fn zero_target_is_identity() {
        let mut p = fixture();
        p.d = vec![C::new(0.0, 0.0); 4];
        let r = newton_deform(&p, &DeformOptions::default()).unwrap();
        assert_eq!(r.diagnostics.newton_iterations, 0);
        assert!(r.xi.iter().all(|x| x.norm() == 0.0));
        assert_eq!(r.f_star.resized(p.f.degree()), p.f);
    }

    #[test]
    fn forward_at_zero_is_zero() {
        let p = fixture();
        let y = forward_map_w(&[0.0; 3], &p).unwrap();
        assert!(y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ansatz_sup_norm_of_single_fraction() {
        let mut p = fixture();
        p.j = Some(0);
        let ctx = DeformContext::new(&p, &DeformOptions::default()).unwrap();
        let mut xi = vec![C::new(0.0, 0.0); 4];
        xi[2] = C::new(0.01, 0.0);
        let mu = ctx.ansatz_mu(&xi, 0.0);
        let want = 0.01 * (ctx.annulus.r + 0.5 / 64.0).powi(-3);
        assert!((mu.sup_norm_grid(64, 64) - want).abs() < 1e-3 * want);
        assert!(mu.terms().all(|(m, _)| m.a == 0));
    }

    #[test]
    fn budget_violation() {
        let mut p = fixture();
        p.d[3] = C::new(0.0, 0.5);
        assert!(matches!(
            newton_deform(&p, &DeformOptions::default()),
            Err(Error::TargetBudget(_))
        ));
    }

    #[test]
    fn variational_identity_and_frame() {
        let ann = AnnulusSpec::new(C::new(0.0, 0.0), 2.0).unwrap();
        let zero = LaurentDensity::zero(ann);
        let z = C::new(0.3, -0.4);
        assert_eq!(variational_predict(&zero, z).unwrap(), z);
        let mu = LaurentDensity::monomial(ann, Monomial::new(0, -2, 0), C::new(0.01, 0.02));
        assert!(variational_predict(&mu, C::new(0.0, 0.0)).unwrap().norm() < 1e-16);
        assert!((variational_predict(&mu, C::new(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!(variational_predict(&mu, C::new(1.9, 0.0)).is_err());
    }
}
