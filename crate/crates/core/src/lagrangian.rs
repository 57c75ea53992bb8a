//! Tracers, deformation gradients and origin diagnostics.
//!
//! Off-grid values come from summing the truncated Fourier series at the
//! point (exact up to rounding) or, for large ensembles that only need
//! positions, from local Lagrange interpolation of stage velocity samples.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::{torus_delta, wrap};
use crate::solver::Stage;
use crate::spectral::Spectral;
use crate::{Complex64, Error};

/// 2×2 matrix, `m[i][j]` = row i, column j.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Frobenius norm.
pub fn mat_norm(m: &Mat2) -> f64 {
    (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
}

/// Velocity and velocity gradient at a point; `grad[i][j] = ∂ⱼuᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VelocityJet {
    pub u: [f64; 2],
    pub grad: Mat2,
}

/// Row range and weights for Hermitian-halved summation.
fn half_rows(spectral: &Spectral, band_limited: bool) -> (Vec<usize>, Vec<usize>) {
    let n = spectral.size();
    let grid = spectral.grid();
    let cut = if band_limited { grid.dealias_cutoff() as i64 } else { n as i64 };
    let rows = (0..=n / 2).filter(|&p| grid.mode(p).abs() <= cut).collect();
    let cols = (0..n).filter(|&q| grid.mode(q).abs() <= cut).collect();
    (rows, cols)
}

fn phase(k: f64, x: f64) -> Complex64 {
    let a = k * x;
    Complex64::new(a.cos(), a.sin())
}

/// Value of a real field given by normalized coefficients at an arbitrary point.
pub fn field_value_at(spectral: &Spectral, coeffs: &[Complex64], x: [f64; 2]) -> f64 {
    let n = spectral.size();
    let (rows, cols) = half_rows(spectral, false);
    let e2: Vec<Complex64> = cols.iter().map(|&q| phase(spectral.wavenumber(q), x[1])).collect();
    let mut acc = 0.0;
    for &p in &rows {
        let mut t = Complex64::new(0.0, 0.0);
        for (j, &q) in cols.iter().enumerate() {
            t += coeffs[p * n + q] * e2[j];
        }
        let w = if p == 0 || p == n / 2 { 1.0 } else { 2.0 };
        acc += w * (phase(spectral.wavenumber(p), x[0]) * t).re;
    }
    acc
}

/// Exact evaluator of the velocity jet induced by vorticity coefficients.
#[derive(Debug, Clone)]
pub struct PointEvaluator {
    rows: Vec<usize>,
    cols: Vec<usize>,
    inv_k2: Vec<f64>,
}

impl PointEvaluator {
    /// `band_limited` restricts the sums to the 2/3 band (enough for solver states).
    pub fn new(spectral: &Spectral, band_limited: bool) -> Self {
        let n = spectral.size();
        let (rows, cols) = half_rows(spectral, band_limited);
        let mut inv_k2 = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                let k2 = spectral.k_squared(p, q);
                inv_k2[p * n + q] = if k2 > 0.0 { 1.0 / k2 } else { 0.0 };
            }
        }
        PointEvaluator { rows, cols, inv_k2 }
    }

    /// Velocity and gradient at `x` from vorticity coefficients `omega`.
    pub fn jet(&self, spectral: &Spectral, omega: &[Complex64], x: [f64; 2]) -> VelocityJet {
        let n = spectral.size();
        let e2: Vec<(Complex64, f64)> = self
            .cols
            .iter()
            .map(|&q| (phase(spectral.wavenumber(q), x[1]), spectral.wavenumber_odd(q)))
            .collect();
        // ψ̂ = ω̂/|k|²; u₁ = ∂₂ψ, u₂ = −∂₁ψ.
        let (mut d1, mut d2, mut d11, mut d12, mut d22) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &p in &self.rows {
            let (mut t0, mut t1, mut t2) =
                (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            let row = p * n;
            for (j, &q) in self.cols.iter().enumerate() {
                let z = omega[row + q] * self.inv_k2[row + q] * e2[j].0;
                let kq = e2[j].1;
                t0 += z;
                t1 += z * kq;
                t2 += z * (kq * kq);
            }
            let w = if p == 0 || p == n / 2 { 1.0 } else { 2.0 };
            let e1 = phase(spectral.wavenumber(p), x[0]) * w;
            let kp = spectral.wavenumber_odd(p);
            let i = Complex64::new(0.0, 1.0);
            // ∂₁ ↔ i k_p, ∂₂ ↔ i k_q
            d1 += (e1 * t0 * i * kp).re;
            d2 += (e1 * t1 * i).re;
            d11 -= (e1 * t0).re * kp * kp;
            d12 -= (e1 * t1).re * kp;
            d22 -= (e1 * t2).re;
        }
        VelocityJet { u: [d2, -d1], grad: [[d12, d22], [-d11, -d12]] }
    }
}

/// `∇u(0)` of the velocity induced by `omega`.
pub fn grad_u_at_origin(spectral: &Spectral, omega: &[Complex64]) -> Mat2 {
    PointEvaluator::new(spectral, false).jet(spectral, omega, [0.0, 0.0]).grad
}

/// Interpolation of packed `u₁ + i u₂` samples with a `2r × 2r` Lagrange stencil.
fn interpolate_velocity(spectral: &Spectral, samples: &[Complex64], x: [f64; 2], radius: usize) -> [f64; 2] {
    let n = spectral.size();
    let h = spectral.grid().spacing();
    let mut weights = [[0.0f64; 16]; 2];
    let mut base = [0i64; 2];
    let width = 2 * radius;
    for d in 0..2 {
        // Shift to [0, 2) so indices are nonnegative.
        let s = (wrap(x[d]) + 2.0) % 2.0 / h;
        let i0 = s.floor() as i64;
        let frac = s - i0 as f64;
        base[d] = i0 - radius as i64 + 1;
        for a in 0..width {
            let xa = a as f64 - (radius as f64 - 1.0);
            let mut w = 1.0;
            for b in 0..width {
                if a != b {
                    let xb = b as f64 - (radius as f64 - 1.0);
                    w *= (frac - xb) / (xa - xb);
                }
            }
            weights[d][a] = w;
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..width {
        let i = (base[0] + a as i64).rem_euclid(n as i64) as usize;
        let mut row = Complex64::new(0.0, 0.0);
        for b in 0..width {
            let j = (base[1] + b as i64).rem_euclid(n as i64) as usize;
            row += samples[i * n + j] * weights[1][b];
        }
        acc += row * weights[0][a];
    }
    [acc.re, acc.im]
}

/// How tracer velocities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    /// Direct Fourier summation; also integrates `Dη`.
    Spectral,
    /// Lagrange interpolation of radius `r` (stencil `2r` wide); positions only.
    Interpolated(usize),
}

/// Lagrangian points with their deformation matrices.
#[derive(Debug, Clone)]
pub struct TracerEnsemble {
    pub initial: Vec<[f64; 2]>,
    /// Current positions, wrapped to [-1, 1)².
    pub positions: Vec<[f64; 2]>,
    /// `Dη` per tracer (identity when not integrated).
    pub deformation: Vec<Mat2>,
    pub evaluation: Evaluation,
    evaluator: Option<PointEvaluator>,
}

impl TracerEnsemble {
    pub fn new(points: Vec<[f64; 2]>, evaluation: Evaluation) -> Self {
        let positions = points.iter().map(|p| [wrap(p[0]), wrap(p[1])]).collect();
        let deformation = vec![IDENTITY; points.len()];
        TracerEnsemble { initial: points, positions, deformation, evaluation, evaluator: None }
    }

    /// `x₀` followed by `x₀ ± δ e₁`, `x₀ ± δ e₂`, for finite-difference `Dη`.
    pub fn with_stencil(x0: [f64; 2], delta: f64) -> Self {
        let pts = vec![
            x0,
            [x0[0] + delta, x0[1]],
            [x0[0] - delta, x0[1]],
            [x0[0], x0[1] + delta],
            [x0[0], x0[1] - delta],
        ];
        TracerEnsemble::new(pts, Evaluation::Spectral)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Centered differences of the stencil tracers `first+1 ..= first+4`.
    pub fn stencil_deformation(&self, first: usize, delta: f64) -> Mat2 {
        let d1 = torus_delta(self.positions[first + 1], self.positions[first + 2]);
        let d2 = torus_delta(self.positions[first + 3], self.positions[first + 4]);
        let s = 0.5 / delta;
        [[d1[0] * s, d2[0] * s], [d1[1] * s, d2[1] * s]]
    }

    /// One RK4 step driven by the four solver stages of the step just taken.
    pub fn advance(&mut self, spectral: &Spectral, stages: &[Stage], dt: f64) -> Result<(), Error> {
        if stages.len() != 4 {
            return Err(Error::InvalidConfig("tracer step needs the four solver stages"));
        }
        match self.evaluation {
            Evaluation::Spectral => {
                if self.evaluator.is_none() {
                    self.evaluator = Some(PointEvaluator::new(spectral, true));
                }
                let ev = self.evaluator.take().expect("set above");
                self.rk4(dt, |s, x| ev.jet(spectral, &stages[s].omega, x));
                self.evaluator = Some(ev);
            }
            Evaluation::Interpolated(r) => {
                if !(1..=8).contains(&r) {
                    return Err(Error::InvalidConfig("interpolation radius must lie in 1..=8"));
                }
                self.rk4(dt, |s, x| VelocityJet {
                    u: interpolate_velocity(spectral, &stages[s].velocity, x, r),
                    grad: [[0.0; 2]; 2],
                });
            }
        }
        Ok(())
    }

    /// One RK4 step in a velocity field that does not change during the step.
    pub fn advance_frozen(&mut self, spectral: &Spectral, omega: &[Complex64], dt: f64) {
        let ev = PointEvaluator::new(spectral, false);
        self.rk4(dt, |_, x| ev.jet(spectral, omega, x));
    }

    fn rk4(&mut self, dt: f64, eval: impl Fn(usize, [f64; 2]) -> VelocityJet) {
        let with_d = self.evaluation == Evaluation::Spectral;
        for (x, d) in self.positions.iter_mut().zip(self.deformation.iter_mut()) {
            let x0 = *x;
            let d0 = *d;
            let shift = |x: [f64; 2], v: [f64; 2], h: f64| [x[0] + h * v[0], x[1] + h * v[1]];
            let dshift = |m: &Mat2, k: &Mat2, h: f64| {
                [[m[0][0] + h * k[0][0], m[0][1] + h * k[0][1]], [m[1][0] + h * k[1][0], m[1][1] + h * k[1][1]]]
            };
            let j1 = eval(0, x0);
            let k1d = mat_mul(&j1.grad, &d0);
            let x2 = shift(x0, j1.u, 0.5 * dt);
            let m2 = dshift(&d0, &k1d, 0.5 * dt);
            let j2 = eval(1, x2);
            let k2d = mat_mul(&j2.grad, &m2);
            let x3 = shift(x0, j2.u, 0.5 * dt);
            let m3 = dshift(&d0, &k2d, 0.5 * dt);
            let j3 = eval(2, x3);
            let k3d = mat_mul(&j3.grad, &m3);
            let x4 = shift(x0, j3.u, dt);
            let m4 = dshift(&d0, &k3d, dt);
            let j4 = eval(3, x4);
            let k4d = mat_mul(&j4.grad, &m4);
            let mut xn = [0.0; 2];
            for c in 0..2 {
                xn[c] = x0[c] + dt / 6.0 * (j1.u[c] + 2.0 * j2.u[c] + 2.0 * j3.u[c] + j4.u[c]);
            }
            *x = [wrap(xn[0]), wrap(xn[1])];
            if with_d {
                for i in 0..2 {
                    for j in 0..2 {
                        d[i][j] = d0[i][j]
                            + dt / 6.0 * (k1d[i][j] + 2.0 * k2d[i][j] + 2.0 * k3d[i][j] + k4d[i][j]);
                    }
                }
            }
        }
    }
}

/// One row of the origin time series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OriginSample {
    pub t: f64,
    /// `∇u(t, 0)`.
    pub grad: Mat2,
    /// `Dη(t, 0)`.
    pub deformation: Mat2,
    /// `max |∇u|` over the grid, for the symmetry tolerance.
    pub grad_linf: f64,
}

impl OriginSample {
    pub fn det(&self) -> f64 {
        det(&self.deformation)
    }

    /// `|∂₁u₂| + |∂₂u₁|`.
    pub fn off_diagonal(&self) -> f64 {
        self.grad[1][0].abs() + self.grad[0][1].abs()
    }

    pub fn trace(&self) -> f64 {
        self.grad[0][0] + self.grad[1][1]
    }

    /// `max(|Dη₁₁|, |Dη₂₂|)`.
    pub fn max_stretch(&self) -> f64 {
        self.deformation[0][0].abs().max(self.deformation[1][1].abs())
    }
}

/// Time series of origin quantities.
#[derive(Debug, Clone, Default)]
pub struct OriginRecord {
    pub samples: Vec<OriginSample>,
}

/// `max over the grid of the Frobenius norm of ∇u`.
pub fn grad_u_linf(spectral: &Spectral, omega: &[Complex64]) -> f64 {
    let n = spectral.size();
    let len = n * n;
    // ∇u = [[∂₁₂ψ, ∂₂₂ψ], [−∂₁₁ψ, −∂₁₂ψ]]; three real fields in two packed transforms.
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    let mut b = vec![Complex64::new(0.0, 0.0); len];
    for p in 0..n {
        let kp = spectral.wavenumber_odd(p);
        for q in 0..n {
            let k2 = spectral.k_squared(p, q);
            if k2 == 0.0 {
                continue;
            }
            let kq = spectral.wavenumber_odd(q);
            let psi = omega[p * n + q] / k2;
            let d12 = -psi * (kp * kq);
            let d22 = -psi * (kq * kq);
            let d11 = -psi * (kp * kp);
            a[p * n + q] = d12 + Complex64::new(-d22.im, d22.re);
            b[p * n + q] = d11;
        }
    }
    crate::fft::inverse_2d(spectral.engine(), &mut a);
    crate::fft::inverse_2d(spectral.engine(), &mut b);
    let mut m = 0.0f64;
    for i in 0..len {
        let (d12, d22, d11) = (a[i].re, a[i].im, b[i].re);
        m = m.max((2.0 * d12 * d12 + d22 * d22 + d11 * d11).sqrt());
    }
    m
}

/// Minimal-image distance on the torus.
pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = torus_delta(a, b);
    d[0].hypot(d[1])
}

/// Smallest `c` with `|x−x'|^{1+ctW} ≤ |η−η'| ≤ |x−x'|^{1−ctW}` on one sample.
pub fn yudovich_exponent_needed(d0: f64, dt: f64, t: f64, w_inf: f64) -> f64 {
    if t <= 0.0 || w_inf <= 0.0 {
        return 0.0;
    }
    (dt / d0).ln().abs() / ((1.0 / d0).ln() * t * w_inf)
}

/// Result of checking the two-sided Hölder bound on tracer pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct YudovichReport {
    pub pairs: usize,
    pub failures: usize,
    /// Largest `c` any pair needed.
    pub worst_needed: f64,
}

impl YudovichReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn merge(&mut self, other: &YudovichReport) {
        self.pairs += other.pairs;
        self.failures += other.failures;
        self.worst_needed = self.worst_needed.max(other.worst_needed);
    }
}

/// Check pairs `(i, j)` of the ensemble at time `t`.
pub fn yudovich_check(
    ensemble: &TracerEnsemble,
    pairs: &[(usize, usize)],
    t: f64,
    w_inf: f64,
    c: f64,
) -> Result<YudovichReport, Error> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidConfig("the Hölder bound is checked for 0 <= t <= 1"));
    }
    let mut report = YudovichReport { pairs: pairs.len(), ..Default::default() };
    for &(i, j) in pairs {
        let d0 = torus_distance(ensemble.initial[i], ensemble.initial[j]);
        if !(d0 > 0.0 && d0 <= 0.5) {
            return Err(Error::InvalidConfig("tracer pairs must start at distance in (0, 1/2]"));
        }
        let dt = torus_distance(ensemble.positions[i], ensemble.positions[j]);
        let a = c * t * w_inf;
        let lower = d0.powf(1.0 + a);
        let upper = d0.powf(1.0 - a);
        // One ulp of slack so that t = 0 compares equal values.
        let ok = dt >= lower * (1.0 - 1e-14) && dt <= upper * (1.0 + 1e-14);
        if !ok {
            report.failures += 1;
        }
        report.worst_needed = report.worst_needed.max(yudovich_exponent_needed(d0, dt, t, w_inf));
    }
    Ok(report)
}

/// One tracer observation for the polar trajectory check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarSample {
    pub r: f64,
    pub theta: f64,
    /// Measured `d|η|/dt`.
    pub dr_dt: f64,
    /// `I(t, |η|)`.
    pub key_integral: f64,
}

/// Worst residual of `d|η|/dt = |η| cos 2θ I(t,|η|) + |η| B_r` against the
/// allowance `|η| sup|B|`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarReport {
    pub samples: usize,
    pub max_residual: f64,
    /// Largest `residual / (|η| sup|B|)`; at most 1 when consistent.
    pub max_ratio: f64,
    pub violations: usize,
}

pub fn polar_consistency(samples: &[PolarSample], sup_b: f64) -> PolarReport {
    let mut rep = PolarReport { samples: samples.len(), ..Default::default() };
    for s in samples {
        let residual = (s.dr_dt - s.r * (2.0 * s.theta).cos() * s.key_integral).abs();
        rep.max_residual = rep.max_residual.max(residual);
        let allow = s.r * sup_b;
        let ratio = if allow > 0.0 {
            residual / allow
        } else if residual > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        rep.max_ratio = rep.max_ratio.max(ratio);
        if residual > allow * (1.0 + 1e-9) + 1e-12 {
            rep.violations += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{assemble_omega0, BubbleConfig};
    use crate::solver::{FlowState, Observer, Solver, SolverConfig, StepInfo};
    use crate::{Grid, SpectralScalarField};
    use alloc::sync::Arc;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spectral(n: usize) -> Arc<Spectral> {
        Spectral::radix2(Grid::new(n).unwrap())
    }

    #[test]
    fn value_at_grid_node_equals_sample() {
        let s = spectral(32);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<f64> = (0..32 * 32).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut f = SpectralScalarField::from_samples(&s, samples.clone()).unwrap();
        let c = f.coeffs().to_vec();
        let g = s.grid();
        for &(i, j) in &[(0usize, 0usize), (3, 17), (31, 5)] {
            let v = field_value_at(&s, &c, [g.coord(i), g.coord(j)]);
            assert!((v - samples[i * 32 + j]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_jet_closed_form() {
        let s = spectral(32);
        let mut w = SpectralScalarField::from_fn(&s, |x1, x2| (PI * x1).sin() * (PI * x2).sin());
        let c = w.coeffs().to_vec();
        let ev = PointEvaluator::new(&s, false);
        let x = [0.3141, -0.7];
        let j = ev.jet(&s, &c, x);
        let k = 1.0 / (2.0 * PI);
        let (s1, c1, s2, c2) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
        assert!((j.u[0] - k * s1 * c2).abs() < 1e-14);
        assert!((j.u[1] + k * c1 * s2).abs() < 1e-14);
        assert!((j.grad[0][0] - 0.5 * c1 * c2).abs() < 1e-13);
        assert!((j.grad[0][1] + 0.5 * s1 * s2).abs() < 1e-13);
        assert!((j.grad[1][0] - 0.5 * s1 * s2).abs() < 1e-13);
        assert!((j.grad[1][1] + 0.5 * c1 * c2).abs() < 1e-13);
        let g0 = grad_u_at_origin(&s, &c);
        assert!((g0[0][0] - 0.5).abs() < 1e-14 && (g0[1][1] + 0.5).abs() < 1e-14);
        assert!(g0[0][1].abs() < 1e-15 && g0[1][0].abs() < 1e-15);
    }

    #[test]
    fn zero_field_gives_zero_jet_and_frozen_tracers() {
        let s = spectral(16);
        let z = s.scratch();
        assert_eq!(grad_u_at_origin(&s, &z), [[0.0; 2]; 2]);
        let mut e = TracerEnsemble::new(vec![[0.1, 0.2], [-0.5, 0.9]], Evaluation::Spectral);
        for _ in 0..10 {
            e.advance_frozen(&s, &z, 0.1);
        }
        assert_eq!(e.positions, e.initial);
        assert!(e.deformation.iter().all(|d| *d == IDENTITY));
    }

    #[test]
    fn off_grid_value_matches_refined_grid() {
        // Band-limited random field: its samples on a 4× finer grid are the
        // exact values at those points.
        let s = spectral(32);
        let fine = spectral(128);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples: Vec<f64> = (0..32 * 32).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut f = SpectralScalarField::from_samples(&s, samples).unwrap();
        let mut c = f.coeffs().to_vec();
        // Remove Nyquist rows so the interpolant is unambiguous.
        for p in 0..32 {
            c[16 * 32 + p] = Complex64::new(0.0, 0.0);
            c[p * 32 + 16] = Complex64::new(0.0, 0.0);
        }
        let mut up = fine.scratch();
        for p in 0..32 {
            for q in 0..32 {
                let (mp, mq) = (s.grid().mode(p), s.grid().mode(q));
                let pp = mp.rem_euclid(128) as usize;
                let qq = mq.rem_euclid(128) as usize;
                up[pp * 128 + qq] = c[p * 32 + q];
            }
        }
        let mut g = SpectralScalarField::from_coeffs(&fine, up).unwrap();
        let fs = g.samples().to_vec();
        let grid = fine.grid();
        for &(i, j) in &[(1usize, 3usize), (77, 101), (127, 64)] {
            let v = field_value_at(&s, &c, [grid.coord(i), grid.coord(j)]);
            assert!((v - fs[i * 128 + j]).abs() < 1e-8);
        }
    }

    #[test]
    fn rigid_rotation_preserves_radius() {
        // Near the centre of a Taylor-Green cell the flow is a rotation with
        // angular speed ½; a tracer very close to it keeps its distance.
        let s = spectral(32);
        let mut w = SpectralScalarField::from_fn(&s, |x1, x2| (PI * x1).sin() * (PI * x2).sin());
        let c = w.coeffs().to_vec();
        let centre = [0.5, 0.5];
        let start = [0.5 + 1e-4, 0.5];
        let mut e = TracerEnsemble::new(vec![start], Evaluation::Spectral);
        let period = 4.0 * PI;
        let steps = 2000;
        for _ in 0..steps {
            e.advance_frozen(&s, &c, period / steps as f64);
        }
        let r = torus_distance(e.positions[0], centre);
        assert!((r - 1e-4).abs() < 1e-6 * 1e-4, "{r}");
        assert!((det(&e.deformation[0]) - 1.0).abs() < 1e-8);
    }

    struct Track {
        ens: TracerEnsemble,
        spectral: Arc<Spectral>,
        origin: Vec<OriginSample>,
    }

    impl Observer for Track {
        fn wants_stages(&self) -> bool {
            true
        }
        fn on_step(&mut self, state: &FlowState, step: &StepInfo<'_>) -> Result<(), Error> {
            self.ens.advance(&self.spectral, step.stages, step.dt)?;
            let g = grad_u_at_origin(&self.spectral, state.omega_coeffs());
            self.origin.push(OriginSample {
                t: state.t(),
                grad: g,
                deformation: self.ens.deformation[0],
                grad_linf: grad_u_linf(&self.spectral, state.omega_coeffs()),
            });
            Ok(())
        }
    }

    #[test]
    fn origin_is_fixed_and_deformation_consistent() {
        let s = spectral(256);
        let cfg = BubbleConfig { l0: 1, n: 2, small_scale_index: Some(3), background: false, amplitude: 10.0, ..Default::default() };
        let mut state = FlowState::new(assemble_omega0(&cfg, &s).unwrap(), 0.0).unwrap();
        let mut ens = TracerEnsemble::new(vec![[0.0, 0.0]], Evaluation::Spectral);
        let delta = 1e-4;
        let probe = TracerEnsemble::with_stencil([0.05, 0.03], delta);
        ens.initial.extend(&probe.initial);
        ens.positions.extend(&probe.positions);
        ens.deformation.extend(&probe.deformation);
        let mut track = Track { ens, spectral: s.clone(), origin: Vec::new() };
        let mut solver = Solver::new(&s, SolverConfig { cadence: 0.1, ..Default::default() }).unwrap();
        solver.run(&mut state, 0.2, &mut track).unwrap();
        let o = track.ens.positions[0];
        assert!(o[0].abs() < 1e-10 && o[1].abs() < 1e-10);
        for row in &track.origin {
            assert!(row.off_diagonal() <= 1e-8 * row.grad_linf);
            assert!(row.trace().abs() <= 1e-8 * row.grad_linf);
            assert!((row.det() - 1.0).abs() < 1e-4);
            let d = row.deformation;
            assert!(d[0][1].abs() + d[1][0].abs() <= 1e-6 * mat_norm(&d));
        }
        let fd = track.ens.stencil_deformation(1, delta);
        let var = track.ens.deformation[1];
        for i in 0..2 {
            for j in 0..2 {
                assert!((fd[i][j] - var[i][j]).abs() <= 0.01 * mat_norm(&var), "{fd:?} vs {var:?}");
            }
        }
    }

    #[test]
    fn yudovich_trivial_cases() {
        let e = TracerEnsemble::new(vec![[0.0, 0.0], [0.1, 0.2], [0.3, -0.1]], Evaluation::Spectral);
        let pairs = [(0, 1), (1, 2)];
        let r = yudovich_check(&e, &pairs, 0.0, 1.0, 0.5).unwrap();
        assert!(r.passed());
        for c in [1e-6, 1.0] {
            assert!(yudovich_check(&e, &pairs, 0.7, 1.0, c).unwrap().passed());
        }
        assert!(yudovich_check(&e, &pairs, 1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn polar_check_on_pure_strain() {
        // u = I (x₁, −x₂) has B = 0; trajectories are explicit.
        let i_val = 0.8;
        let (x10, x20) = (0.1f64, 0.2f64);
        let r_at = |t: f64| ((x10 * (i_val * t).exp()).powi(2) + (x20 * (-i_val * t).exp()).powi(2)).sqrt();
        let mut samples = Vec::new();
        let h = 1e-4;
        for k in 1..50 {
            let t = k as f64 * 0.02;
            let (x1, x2) = (x10 * (i_val * t).exp(), x20 * (-i_val * t).exp());
            let dr = (r_at(t + h) - r_at(t - h)) / (2.0 * h);
            samples.push(PolarSample { r: x1.hypot(x2), theta: x2.atan2(x1), dr_dt: dr, key_integral: i_val });
        }
        let rep = polar_consistency(&samples, 0.0);
        assert!(rep.max_residual < 1e-6);
        assert!(polar_consistency(&[], 0.0).max_residual == 0.0);
    }
}
