//! Gauss–Legendre rules and the polar product rule on the unit disk.

use num_complex::Complex;

use crate::scalar::{cnt, lit, Real};
use crate::series::PowerSeries;

/// Gauss–Legendre nodes and weights on `[a, b]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule on `[a, b]`. Nodes are found by Newton iteration on the
    /// three-term Legendre recurrence in `f64`, then converted.
    pub fn new(n: usize, a: T, b: T) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let (x, w) = legendre_f64(n);
        let half = (b - a) / lit(2.0);
        let mid = (b + a) / lit(2.0);
        let nodes = x.iter().map(|&xi| mid + half * lit::<T>(xi)).collect();
        let weights = w.iter().map(|&wi| half * lit::<T>(wi)).collect();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut g: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * g(x))
    }
}

fn legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // Recompute the derivative at the converged node.
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        if n > 1 {
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
        } else {
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Product rule on the closed unit disk: Gauss–Legendre in `r` times the
/// trapezoid rule in the angle. Integrates against `dx dy`.
#[derive(Clone, Debug)]
pub struct DiskQuadrature<T> {
    pub radial: GaussLegendre<T>,
    pub angular: usize,
}

impl<T: Real> DiskQuadrature<T> {
    pub fn new(radial_nodes: usize, angular_nodes: usize) -> Self {
        Self {
            radial: GaussLegendre::new(radial_nodes, T::zero(), T::one()),
            angular: angular_nodes,
        }
    }

    /// A rule that integrates `|f|^2` exactly for polynomials of this degree,
    /// with headroom for non-integer powers.
    pub fn for_degree(degree: usize) -> Self {
        let radial = (degree + 16).clamp(48, 256);
        let angular = (4 * (degree + 1)).next_power_of_two().clamp(256, 8192);
        Self::new(radial, angular)
    }

    pub fn node_count(&self) -> usize {
        self.radial.len() * self.angular
    }

    /// Values of `f` on every ring of the grid, ring-major.
    pub fn sample(&self, f: &PowerSeries<T>) -> Vec<Vec<Complex<T>>> {
        self.radial
            .nodes
            .iter()
            .map(|&r| f.sample_circle(r, self.angular).values)
            .collect()
    }

    /// `sum_i w_i r_i (2 pi / M) sum_k g(ring i, node k)`.
    pub fn integrate_rings<G>(&self, rings: usize, mut g: G) -> T
    where
        G: FnMut(usize, usize) -> T,
    {
        let two_pi_over_m = T::TAU() / cnt(self.angular);
        let mut acc = T::zero();
        for i in 0..rings.min(self.radial.len()) {
            let mut ring = T::zero();
            for k in 0..self.angular {
                ring = ring + g(i, k);
            }
            acc = acc + self.radial.weights[i] * self.radial.nodes[i] * ring * two_pi_over_m;
        }
        acc
    }

    /// `∬_D |f|^p dx dy`.
    pub fn area_power_integral(&self, f: &PowerSeries<T>, p: T) -> T {
        let rings = self.sample(f);
        self.integrate_rings(rings.len(), |i, k| rings[i][k].norm().powf(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(10, 0.0, 1.0);
        for d in 0..20 {
            let got = rule.integrate(|x| x.powi(d));
            assert!(
                (got - 1.0 / (d as f64 + 1.0)).abs() < 1e-14,
                "degree {d}: {got}"
            );
        }
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_node_rule() {
        let rule = GaussLegendre::<f64>::new(1, -1.0, 1.0);
        assert_eq!(rule.nodes, vec![0.0]);
        assert!((rule.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn disk_area() {
        let q = DiskQuadrature::<f64>::new(8, 16);
        let one = PowerSeries::constant(Complex::new(1.0, 0.0));
        let area = q.area_power_integral(&one, 2.0);
        assert!((area - std::f64::consts::PI).abs() < 1e-13);
    }
}
