//! Gauss-Legendre rules.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of a Gauss-Legendre rule on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `m`-point rule on [-1, 1], by Newton iteration on `P_m`.
    pub fn new(m: usize) -> Self {
        assert!(m > 0, "rule needs at least one node");
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            // Tricomi's initial guess, descending order.
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            dp = if d != 0.0 { d } else { dp };
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        nodes.reverse();
        weights.reverse();
        GaussLegendre { nodes, weights }
    }

    /// The same rule mapped affinely to [a, b].
    pub fn on(m: usize, a: f64, b: f64) -> Self {
        let mut rule = GaussLegendre::new(m);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        rule.nodes.iter_mut().for_each(|x| *x = c + h * *x);
        rule.weights.iter_mut().for_each(|w| *w *= h);
        rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_m(x), P_m'(x))`.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss rule: `panels` equal panels on [a, b], `m` nodes each.
pub fn composite(m: usize, panels: usize, a: f64, b: f64) -> GaussLegendre {
    let base = GaussLegendre::new(m);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(m * panels);
    let mut weights = Vec::with_capacity(m * panels);
    for p in 0..panels {
        let c = a + h * (p as f64 + 0.5);
        for (x, w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(c + 0.5 * h * x);
            weights.push(0.5 * h * w);
        }
    }
    GaussLegendre { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for m in 1..20 {
            let rule = GaussLegendre::new(m);
            for deg in 0..(2 * m) {
                let got = rule.integrate(|x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "m = {m}, degree {deg}");
            }
        }
    }

    #[test]
    fn weights_are_positive_and_sum_to_length() {
        let rule = GaussLegendre::on(33, 0.5, 2.0);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        assert!((rule.weights.iter().sum::<f64>() - 1.5).abs() < 1e-14);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn smooth_integrand() {
        let rule = composite(8, 4, 0.0, PI);
        assert!((rule.integrate(|x| x.sin()) - 2.0).abs() < 1e-14);
    }
}
