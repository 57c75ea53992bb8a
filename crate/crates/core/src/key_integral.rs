//! The key integral
//!
//! ```text
//! I(t, r) = (4/π) ∫₀^{π/2} ∫_{2r}^{1} sin 2θ / s · ω(t, s, θ) ds dθ
//! ```
//!
//! its per-bubble parts, and the remainder `B` in
//! `u = r I(t, r) (cos θ, −sin θ) + r B(t, r, θ)`.
//!
//! The radial integral is done in `σ = ln s` on panels aligned with octaves
//! `[2^{-j-1}, 2^{-j}]`, so fields with octave-aligned jumps integrate exactly.
//! For `r = 0` the disk `s < r_min` is covered by the quadratic Taylor term
//! of the (odd-odd) field at the origin.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::fft::inverse_2d;
use crate::initial_data::{assemble_component, BubbleConfig, Component};
use crate::quadrature::GaussLegendre;
use crate::solver::FlowState;
use crate::spectral::Spectral;
use crate::{Complex64, Error};

/// Node layout of the polar rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarQuadrature {
    /// Inner radius for `r = 0`, a power of two.
    pub r_min: f64,
    /// Outer radius of the integral (1 in the key integral).
    pub r_max: f64,
    pub panels_per_octave: usize,
    pub radial_order: usize,
    pub angular_panels: usize,
    pub angular_order: usize,
    /// Above this many nodes, grid fields are sampled by bicubic
    /// interpolation of a Fourier-upsampled grid instead of exact summation.
    pub exact_node_limit: usize,
    /// Upsampling factor of that grid (a power of two).
    pub upsample: usize,
}

impl Default for PolarQuadrature {
    fn default() -> Self {
        PolarQuadrature {
            r_min: (-14.0f64).exp2(),
            r_max: 1.0,
            panels_per_octave: 2,
            radial_order: 8,
            angular_panels: 4,
            angular_order: 8,
            exact_node_limit: 2048,
            upsample: 4,
        }
    }
}

impl PolarQuadrature {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return Err(Error::InvalidConfig("need 0 < r_min < r_max"));
        }
        if !(self.r_max <= 1.0) {
            return Err(Error::InvalidConfig("r_max must not exceed 1"));
        }
        if self.panels_per_octave == 0 || self.radial_order == 0 || self.angular_panels == 0 || self.angular_order == 0 {
            return Err(Error::InvalidConfig("quadrature counts must be positive"));
        }
        if !self.upsample.is_power_of_two() {
            return Err(Error::InvalidConfig("upsample must be a power of two"));
        }
        Ok(())
    }

    /// Doubled panel counts in both directions.
    pub fn refined(&self) -> Self {
        PolarQuadrature {
            panels_per_octave: 2 * self.panels_per_octave,
            angular_panels: 2 * self.angular_panels,
            ..*self
        }
    }

    /// Rule in σ = ln s on `[ln lo, ln hi]`; panel ends at every power of two.
    fn radial_rule(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        if !(hi > lo) {
            return (nodes, weights);
        }
        let base = GaussLegendre::new(self.radial_order);
        let (a, b) = (lo.ln(), hi.ln());
        let ln2 = core::f64::consts::LN_2;
        let step = ln2 / self.panels_per_octave as f64;
        // Breakpoints: a, every multiple of step inside (a, b), b.
        let mut cuts = vec![a];
        let mut k = (a / step).floor() + 1.0;
        while k * step < b - 1e-12 * step {
            if k * step > a + 1e-12 * step {
                cuts.push(k * step);
            }
            k += 1.0;
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in base.nodes.iter().zip(&base.weights) {
                nodes.push((c + h * x).exp());
                weights.push(wt * h);
            }
        }
        (nodes, weights)
    }

    fn angular_rule(&self) -> GaussLegendre {
        crate::quadrature::composite(self.angular_order, self.angular_panels, 0.0, FRAC_PI_2)
    }

    fn lower_limit(&self, r: f64) -> f64 {
        if r > 0.0 {
            2.0 * r
        } else {
            self.r_min
        }
    }

    pub fn node_count(&self, r: f64) -> usize {
        self.radial_rule(self.lower_limit(r), self.r_max).0.len() * self.angular_order * self.angular_panels
    }

    /// `(4/π) ∫∫ sin 2θ / s · f(s, θ) ds dθ` over `s ∈ [max(2r, r_min), r_max]`.
    pub fn integrate(&self, r: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let (rn, rw) = self.radial_rule(self.lower_limit(r), self.r_max);
        let ang = self.angular_rule();
        let mut acc = 0.0;
        for (&s, &ws) in rn.iter().zip(&rw) {
            let mut inner = 0.0;
            for (&th, &wt) in ang.nodes.iter().zip(&ang.weights) {
                inner += wt * (2.0 * th).sin() * f(s, th);
            }
            acc += ws * inner;
        }
        4.0 / PI * acc
    }
}

/// Point values of a scalar field.
pub trait PointSampler {
    fn value(&self, x: [f64; 2]) -> f64;
}

impl<F: Fn([f64; 2]) -> f64> PointSampler for F {
    fn value(&self, x: [f64; 2]) -> f64 {
        self(x)
    }
}

/// Exact Fourier summation at each point.
pub struct ExactSampler {
    spectral: Arc<Spectral>,
    coeffs: Vec<Complex64>,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl ExactSampler {
    pub fn new(spectral: &Arc<Spectral>, coeffs: &[Complex64]) -> Self {
        let n = spectral.size();
        let grid = spectral.grid();
        // Skip rows and columns that are identically zero.
        let rows = (0..=n / 2).filter(|&p| (0..n).any(|q| coeffs[p * n + q] != Complex64::new(0.0, 0.0))).collect();
        let cols = (0..n).filter(|&q| (0..n).any(|p| coeffs[p * n + q] != Complex64::new(0.0, 0.0))).collect();
        let _ = grid;
        ExactSampler { spectral: spectral.clone(), coeffs: coeffs.to_vec(), rows, cols }
    }
}

impl PointSampler for ExactSampler {
    fn value(&self, x: [f64; 2]) -> f64 {
        let s = &self.spectral;
        let n = s.size();
        let e2: Vec<Complex64> = self
            .cols
            .iter()
            .map(|&q| {
                let a = s.wavenumber(q) * x[1];
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        let mut acc = 0.0;
        for &p in &self.rows {
            let mut t = Complex64::new(0.0, 0.0);
            for (j, &q) in self.cols.iter().enumerate() {
                t += self.coeffs[p * n + q] * e2[j];
            }
            let a = s.wavenumber(p) * x[0];
            let w = if p == 0 || p == n / 2 { 1.0 } else { 2.0 };
            acc += w * (Complex64::new(a.cos(), a.sin()) * t).re;
        }
        acc
    }
}

/// Bicubic (Keys, a = −1/2) interpolation of samples on a periodic grid.
pub struct CubicSampler {
    n: usize,
    h: f64,
    samples: Vec<f64>,
}

fn keys(t: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        (1.5 * t - 2.5) * t * t + 1.0
    } else if t < 2.0 {
        ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
    } else {
        0.0
    }
}

impl CubicSampler {
    /// Zero-pads `coeffs` (on `source`) to the grid of `fine` and samples there.
    pub fn new(source: &Spectral, coeffs: &[Complex64], fine: &Spectral) -> Result<Self, Error> {
        let (n, m) = (source.size(), fine.size());
        if m < n {
            return Err(Error::GridMismatch { expected: n, found: m });
        }
        let mut buf = fine.scratch();
        let g = source.grid();
        for p in 0..n {
            let pp = g.mode(p).rem_euclid(m as i64) as usize;
            for q in 0..n {
                let qq = g.mode(q).rem_euclid(m as i64) as usize;
                buf[pp * m + qq] = coeffs[p * n + q];
            }
        }
        inverse_2d(fine.engine(), &mut buf);
        Ok(CubicSampler { n: m, h: fine.grid().spacing(), samples: buf.iter().map(|c| c.re).collect() })
    }

    /// Interpolates the given samples directly.
    pub fn from_samples(n: usize, samples: Vec<f64>) -> Self {
        CubicSampler { n, h: 2.0 / n as f64, samples }
    }
}

impl PointSampler for CubicSampler {
    fn value(&self, x: [f64; 2]) -> f64 {
        let n = self.n as i64;
        let mut idx = [0i64; 2];
        let mut w = [[0.0; 4]; 2];
        for d in 0..2 {
            let s = x[d].rem_euclid(2.0) / self.h;
            let i0 = s.floor();
            let f = s - i0;
            idx[d] = i0 as i64 - 1;
            for a in 0..4 {
                w[d][a] = keys(f - (a as f64 - 1.0));
            }
        }
        let mut acc = 0.0;
        for a in 0..4 {
            let i = (idx[0] + a as i64).rem_euclid(n) as usize;
            let mut row = 0.0;
            for b in 0..4 {
                let j = (idx[1] + b as i64).rem_euclid(n) as usize;
                row += w[1][b] * self.samples[i * self.n + j];
            }
            acc += w[0][a] * row;
        }
        acc
    }
}

/// Sampler for a grid field: exact below the node limit, bicubic above.
pub fn grid_sampler(
    spectral: &Arc<Spectral>,
    coeffs: &[Complex64],
    quad: &PolarQuadrature,
    nodes: usize,
    fine: Option<&Arc<Spectral>>,
) -> Result<Box<dyn PointSampler>, Error> {
    if nodes <= quad.exact_node_limit {
        return Ok(Box::new(ExactSampler::new(spectral, coeffs)));
    }
    let owned;
    let fine = match fine {
        Some(f) => f,
        None => {
            let g = crate::Grid::new(spectral.size() * quad.upsample)?;
            owned = Spectral::radix2(g);
            &owned
        }
    };
    Ok(Box::new(CubicSampler::new(spectral, coeffs, fine)?))
}

/// `∂₁∂₂ω(0)` from coefficients.
pub fn mixed_derivative_at_origin(spectral: &Spectral, coeffs: &[Complex64]) -> f64 {
    let n = spectral.size();
    let mut acc = 0.0;
    for p in 0..n {
        let kp = spectral.wavenumber_odd(p);
        for q in 0..n {
            acc -= kp * spectral.wavenumber_odd(q) * coeffs[p * n + q].re;
        }
    }
    acc
}

/// Value of `I` with the inner-disk term it includes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KeyIntegralValue {
    pub value: f64,
    /// Contribution of `s < r_min` (Taylor term; zero for `r > 0`).
    pub inner: f64,
    /// `|I(refined) − I|` when a Richardson estimate was requested.
    pub error: Option<f64>,
}

/// Key integral of a closed-form field.
pub fn key_integral_fn(
    quad: &PolarQuadrature,
    r: f64,
    f: impl Fn(f64, f64) -> f64,
) -> Result<f64, Error> {
    quad.validate()?;
    if !(0.0..=0.5).contains(&r) {
        return Err(Error::InvalidRegion("r must lie in [0, 1/2]"));
    }
    Ok(quad.integrate(r, |s, th| f(s * th.cos(), s * th.sin())))
}

/// Key integral of a grid field at radius `r`.
pub fn compute_i(
    spectral: &Arc<Spectral>,
    coeffs: &[Complex64],
    r: f64,
    quad: &PolarQuadrature,
    fine: Option<&Arc<Spectral>>,
) -> Result<KeyIntegralValue, Error> {
    quad.validate()?;
    if !(0.0..=0.5).contains(&r) {
        return Err(Error::InvalidRegion("r must lie in [0, 1/2]"));
    }
    let nodes = quad.node_count(r);
    let sampler = grid_sampler(spectral, coeffs, quad, nodes, fine)?;
    compute_i_with(spectral, coeffs, r, quad, &*sampler)
}

/// As [`compute_i`], reusing a sampler built for the field.
pub fn compute_i_with(
    spectral: &Spectral,
    coeffs: &[Complex64],
    r: f64,
    quad: &PolarQuadrature,
    sampler: &dyn PointSampler,
) -> Result<KeyIntegralValue, Error> {
    let value = quad.integrate(r, |s, th| sampler.value([s * th.cos(), s * th.sin()]));
    let mut inner = 0.0;
    if r * 2.0 < quad.r_min {
        // ω ≈ c x₁x₂ = c s² sin 2θ / 2 near 0, so the disk adds c r_min² / 4.
        let c = mixed_derivative_at_origin(spectral, coeffs);
        let rho = quad.r_min.max(2.0 * r);
        let r0 = 2.0 * r;
        inner = c * (rho * rho - r0 * r0) / 4.0;
        // The field must vanish like the Taylor term on the inner circle, up
        // to sampling noise relative to its sup bound Σ|ĉ|.
        let scale = coeffs.iter().map(|c| c.norm()).sum::<f64>();
        let mut worst = 0.0f64;
        for k in 0..16 {
            let th = (k as f64 + 0.5) * FRAC_PI_2 / 16.0;
            let x = [rho * th.cos(), rho * th.sin()];
            let model = 0.5 * c * rho * rho * (2.0 * th).sin();
            worst = worst.max((sampler.value(x) - model).abs());
        }
        if worst > 1e-6 * scale {
            return Err(Error::SingularIntegrand { max_near_origin: worst });
        }
    }
    Ok(KeyIntegralValue { value: value + inner, inner, error: None })
}

/// [`compute_i`] plus the change under one refinement as an error estimate;
/// the refined value is returned.
pub fn compute_i_richardson(
    spectral: &Arc<Spectral>,
    coeffs: &[Complex64],
    r: f64,
    quad: &PolarQuadrature,
    fine: Option<&Arc<Spectral>>,
) -> Result<KeyIntegralValue, Error> {
    let coarse = compute_i(spectral, coeffs, r, quad, fine)?;
    let mut refined = compute_i(spectral, coeffs, r, &quad.refined(), fine)?;
    refined.error = Some((refined.value - coarse.value).abs());
    Ok(refined)
}

/// Passive scalars `c_k` seeded with the components of `ω₀,ₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleTracks {
    /// `(component, weight in ω, scalar index in the state)`.
    pub entries: Vec<(Component, f64, usize)>,
}

impl BubbleTracks {
    /// Attach one scalar per nonzero component of `cfg` to `state`.
    pub fn attach(cfg: &BubbleConfig, state: &mut FlowState) -> Result<Self, Error> {
        let spectral = state.spectral().clone();
        let mut entries = Vec::new();
        for c in cfg.components() {
            let field = assemble_component(cfg, c, &spectral);
            let idx = state.add_scalar(field)?;
            entries.push((c, cfg.weight(c), idx));
        }
        Ok(BubbleTracks { entries })
    }

    pub fn index_of(&self, c: Component) -> Option<usize> {
        self.entries.iter().position(|e| e.0 == c)
    }
}

/// `I` of the weighted tracked component `weight · c_k(t)`.
pub fn per_bubble_i(
    state: &FlowState,
    tracks: &BubbleTracks,
    component: Component,
    r: f64,
    quad: &PolarQuadrature,
    fine: Option<&Arc<Spectral>>,
) -> Result<f64, Error> {
    let pos = tracks.index_of(component).ok_or(Error::InvalidConfig("component is not tracked"))?;
    let (_, weight, idx) = tracks.entries[pos];
    let v = compute_i(state.spectral(), state.scalar_coeffs(idx), r, quad, fine)?;
    Ok(weight * v.value)
}

/// Annulus `{r_lo ≤ |x| ≤ r_hi}` in the closed first quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub r_lo: f64,
    pub r_hi: f64,
    pub radial_samples: usize,
    pub angular_samples: usize,
}

impl Default for Annulus {
    fn default() -> Self {
        Annulus { r_lo: 1.0 / 64.0, r_hi: 0.5, radial_samples: 24, angular_samples: 24 }
    }
}

/// Size of the remainder `B` over a region.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RemainderEstimate {
    pub sup_b: f64,
    pub omega_linf: f64,
    /// `sup|B| / ‖ω‖_{L∞}`.
    pub ratio: f64,
}

/// Sample `B = u/r − (cos θ, −sin θ) I(t, r)` over `region`.
pub fn decompose_b(
    spectral: &Arc<Spectral>,
    omega: &[Complex64],
    region: &Annulus,
    quad: &PolarQuadrature,
    fine: Option<&Arc<Spectral>>,
) -> Result<RemainderEstimate, Error> {
    if !(region.r_lo > 0.0) {
        return Err(Error::InvalidRegion("the region must stay away from r = 0"));
    }
    if !(region.r_hi <= 0.5 && region.r_lo < region.r_hi) {
        return Err(Error::InvalidRegion("need 0 < r_lo < r_hi <= 1/2"));
    }
    if region.radial_samples < 2 || region.angular_samples < 1 {
        return Err(Error::InvalidRegion("region needs at least 2 radial and 1 angular sample"));
    }
    quad.validate()?;
    let n = spectral.size();
    let len = n * n;
    let mut u1 = vec![Complex64::new(0.0, 0.0); len];
    let mut u2 = vec![Complex64::new(0.0, 0.0); len];
    spectral.velocity(omega, &mut u1, &mut u2);

    // ‖ω‖_{L∞} from the samples.
    let mut w = omega.to_vec();
    inverse_2d(spectral.engine(), &mut w);
    let omega_linf = w.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));

    let always_cubic = PolarQuadrature { exact_node_limit: 0, ..*quad };
    let upsampled;
    let fine = match fine {
        Some(f) => f,
        None => {
            upsampled = Spectral::radix2(crate::Grid::new(n * quad.upsample)?);
            &upsampled
        }
    };
    let sw = grid_sampler(spectral, omega, &always_cubic, usize::MAX, Some(fine))?;
    let s1 = grid_sampler(spectral, &u1, &always_cubic, usize::MAX, Some(fine))?;
    let s2 = grid_sampler(spectral, &u2, &always_cubic, usize::MAX, Some(fine))?;

    let mut sup_b = 0.0f64;
    let ratio_r = region.r_hi / region.r_lo;
    for j in 0..region.radial_samples {
        let r = region.r_lo * ratio_r.powf(j as f64 / (region.radial_samples - 1) as f64);
        let i_r = compute_i_with(spectral, omega, r, quad, &*sw)?.value;
        for k in 0..region.angular_samples {
            let th = (k as f64 + 0.5) * FRAC_PI_2 / region.angular_samples as f64;
            let x = [r * th.cos(), r * th.sin()];
            let b1 = s1.value(x) / r - th.cos() * i_r;
            let b2 = s2.value(x) / r + th.sin() * i_r;
            sup_b = sup_b.max(b1.hypot(b2));
        }
    }
    let ratio = if omega_linf > 0.0 { sup_b / omega_linf } else { 0.0 };
    Ok(RemainderEstimate { sup_b, omega_linf, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::assemble_omega0;
    use crate::{Grid, SpectralScalarField};

    #[test]
    fn zero_field() {
        let s = Spectral::radix2(Grid::new(32).unwrap());
        let z = s.scratch();
        let q = PolarQuadrature::default();
        assert_eq!(compute_i(&s, &z, 0.0, &q, None).unwrap().value, 0.0);
        let b = decompose_b(&s, &z, &Annulus::default(), &q, None).unwrap();
        assert_eq!(b.sup_b, 0.0);
    }

    #[test]
    fn annulus_indicator_closed_form() {
        let q = PolarQuadrature::default();
        let ind = |x1: f64, x2: f64| {
            let s = x1.hypot(x2);
            if (0.25..0.5).contains(&s) {
                1.0
            } else {
                0.0
            }
        };
        let exact = 4.0 / PI * 2.0f64.ln();
        let coarse = key_integral_fn(&q, 0.0, ind).unwrap();
        let fine = key_integral_fn(&q.refined(), 0.0, ind).unwrap();
        assert!((fine - exact).abs() < 1e-6, "{fine} vs {exact}");
        assert!((coarse - exact).abs() < 1e-6);
    }

    #[test]
    fn integral_is_nonincreasing_in_r_for_positive_data() {
        let cfg = BubbleConfig { l0: 1, n: 3, small_scale_index: Some(4), background: false, ..Default::default() };
        let q = PolarQuadrature { angular_panels: 8, panels_per_octave: 4, ..Default::default() };
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let r = 0.5 * k as f64 / 24.0;
            let v = key_integral_fn(&q, r, |a, b| cfg.omega0_at(a, b)).unwrap();
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn grid_and_closed_form_agree_for_resolved_data() {
        let cfg = BubbleConfig { l0: 1, n: 2, small_scale_amplitude: 0.0, background: false, ..Default::default() };
        let s = Spectral::radix2(Grid::new(256).unwrap());
        let mut w = assemble_omega0(&cfg, &s).unwrap();
        let c = w.coeffs().to_vec();
        let q = PolarQuadrature { panels_per_octave: 4, angular_panels: 8, ..Default::default() };
        let grid = compute_i(&s, &c, 0.0, &q, None).unwrap().value;
        let exact = key_integral_fn(&q, 0.0, |a, b| cfg.omega0_at(a, b)).unwrap();
        assert!(exact > 0.0);
        assert!((grid - exact).abs() < 2e-3 * exact, "{grid} vs {exact}");
    }

    #[test]
    fn singular_integrand_is_flagged() {
        // Not odd-odd: does not vanish at the origin.
        let s = Spectral::radix2(Grid::new(32).unwrap());
        let mut f = SpectralScalarField::from_fn(&s, |x1, _| (PI * x1).cos());
        let c = f.coeffs().to_vec();
        let q = PolarQuadrature::default();
        assert!(matches!(compute_i(&s, &c, 0.0, &q, None), Err(Error::SingularIntegrand { .. })));
        assert!(compute_i(&s, &c, 0.1, &q, None).is_ok());
    }

    #[test]
    fn taylor_green_remainder() {
        // For sin πx₁ sin πx₂ the strain at 0 is ½ and B → ∂u(0)·e_r − I e_r' as r → 0.
        let s = Spectral::radix2(Grid::new(32).unwrap());
        let mut f = SpectralScalarField::from_fn(&s, |x1, x2| (PI * x1).sin() * (PI * x2).sin());
        let c = f.coeffs().to_vec();
        let q = PolarQuadrature::default();
        let i0 = compute_i(&s, &c, 0.0, &q, None).unwrap().value;
        let near = Annulus { r_lo: 1e-3, ..Default::default() };
        let b = decompose_b(&s, &c, &near, &q, None).unwrap();
        assert!(i0 > 0.0);
        assert!((i0 - 0.5).abs() <= b.sup_b * (1.0 + 1e-3), "{i0} {b:?}");
        assert!(b.ratio.is_finite() && b.ratio > 0.0);
    }

    #[test]
    fn b_rejects_origin() {
        let s = Spectral::radix2(Grid::new(16).unwrap());
        let z = s.scratch();
        let reg = Annulus { r_lo: 0.0, ..Default::default() };
        assert!(matches!(
            decompose_b(&s, &z, &reg, &PolarQuadrature::default(), None),
            Err(Error::InvalidRegion(_))
        ));
    }

    #[test]
    fn cubic_sampler_matches_exact() {
        let cfg = BubbleConfig { l0: 1, n: 2, small_scale_amplitude: 0.0, background: false, ..Default::default() };
        let s = Spectral::radix2(Grid::new(128).unwrap());
        let fine = Spectral::radix2(Grid::new(512).unwrap());
        let mut w = assemble_omega0(&cfg, &s).unwrap();
        let c = w.coeffs().to_vec();
        let ex = ExactSampler::new(&s, &c);
        let cu = CubicSampler::new(&s, &c, &fine).unwrap();
        for &x in &[[0.3, 0.41], [-0.77, 0.05], [0.5, 0.5], [0.123, -0.9]] {
            assert!((ex.value(x) - cu.value(x)).abs() < 2e-3, "{x:?}");
        }
    }
}
