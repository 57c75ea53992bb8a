//! The multi-scale odd-odd vorticity family: bubbles `a_ℓ φ_ℓ`, the small
//! blob `φ_m`, the background `ω̃₀` and the partial sums `S_k`.
//!
//! Every field is produced by evaluating closed-form expressions at the
//! sample points, so odd-odd symmetry and support disjointness hold exactly
//! on the grid before any transform.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, SpectralScalarField, Spectral};

/// C∞ transition: 0 for `s ≤ 0`, 1 for `s ≥ 1`, strictly increasing between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Radial bump: 1 on `r ≤ 1/8`, 0 on `r ≥ 1/4`.
pub fn bump(r: f64) -> f64 {
    1.0 - smooth_step(8.0 * r - 1.0)
}

/// `φ₀(x) = Σ ε₁ε₂ φ(x − ε)` over `ε ∈ {±1}²`, as a function on the plane.
pub fn phi0(x1: f64, x2: f64) -> f64 {
    let mut v = 0.0;
    for e1 in [-1.0, 1.0] {
        for e2 in [-1.0, 1.0] {
            let r = (x1 - e1).hypot(x2 - e2);
            if r < 0.25 {
                v += e1 * e2 * bump(r);
            }
        }
    }
    v
}

/// `φ_ℓ(x) = φ₀(2^ℓ x)` for a point given by its representative in [-1, 1)².
pub fn phi_level(level: u32, x1: f64, x2: f64) -> f64 {
    let s = (level as f64).exp2();
    phi0(s * x1, s * x2)
}

/// `a_ℓ = ℓ^{-1/2-ε}`.
pub fn a_seq(l: u32, epsilon: f64) -> f64 {
    assert!(l >= 1, "a_seq is defined for l >= 1");
    (l as f64).powf(-0.5 - epsilon)
}

/// Inner and outer edge of the background transition for level `l0`.
fn background_edges(l0: u32) -> (f64, f64) {
    ((-(l0 as f64) + 2.0).exp2(), (-(l0 as f64) + 3.0).exp2())
}

fn background_profile(x: f64, a: f64, b: f64) -> f64 {
    let w = b - a;
    smooth_step((x - a) / w) * smooth_step((1.0 - a - x) / w)
}

/// `ω̃₀`: 0 off `[a, 1−a]²`, 1 on `[b, 1−b]²` in the first quadrant with
/// `a = 2^{-ℓ₀+2}`, `b = 2^{-ℓ₀+3}`, extended odd in each coordinate.
pub fn background_omega_tilde(x1: f64, x2: f64, l0: u32) -> f64 {
    let (a, b) = background_edges(l0);
    let s = x1.signum() * x2.signum();
    if x1 == 0.0 || x2 == 0.0 {
        return 0.0;
    }
    s * background_profile(x1.abs(), a, b) * background_profile(x2.abs(), a, b)
}

/// Parameters of `ω₀,ₙ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleConfig {
    /// Coarsest bubble index ℓ₀.
    pub l0: u32,
    /// Finest bubble index.
    pub n: u32,
    pub epsilon: f64,
    /// Global multiplier.
    pub amplitude: f64,
    /// Multiplier of the small blob (0 removes it).
    pub small_scale_amplitude: f64,
    /// Level of the small blob; `None` means `2n`.
    pub small_scale_index: Option<u32>,
    /// Include `ω̃₀` (needs `ℓ₀ ≥ 5` for a non-empty plateau).
    pub background: bool,
}

impl Default for BubbleConfig {
    fn default() -> Self {
        BubbleConfig {
            l0: 10,
            n: 10,
            epsilon: 0.125,
            amplitude: 1.0,
            small_scale_amplitude: 1.0,
            small_scale_index: None,
            background: true,
        }
    }
}

/// Which additive piece of `ω₀,ₙ` to generate (without its weight).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// `φ_ℓ` for a bubble level ℓ.
    Bubble(u32),
    /// The small blob `φ_m`.
    SmallScale,
    Background,
}

impl BubbleConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.l0 < 1 {
            return Err(Error::InvalidConfig("l0 must be at least 1"));
        }
        if self.n < self.l0 {
            return Err(Error::InvalidConfig("n must be at least l0"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(Error::InvalidConfig("epsilon must lie in (0, 1/4)"));
        }
        if !self.amplitude.is_finite() || !self.small_scale_amplitude.is_finite() {
            return Err(Error::InvalidConfig("amplitudes must be finite"));
        }
        if self.background && self.l0 < 5 {
            return Err(Error::InvalidConfig("the background needs l0 >= 5"));
        }
        if self.small_scale_index() <= self.n {
            return Err(Error::InvalidConfig("small_scale_index must exceed n"));
        }
        Ok(())
    }

    pub fn small_scale_index(&self) -> u32 {
        self.small_scale_index.unwrap_or(2 * self.n)
    }

    /// Finest level actually present in the data.
    pub fn deepest_index(&self) -> u32 {
        if self.small_scale_amplitude != 0.0 {
            self.small_scale_index()
        } else {
            self.n
        }
    }

    /// Smallest admissible grid size: 16 samples across the finest bubble
    /// diameter, i.e. `2^{deepest + 4}`.
    pub fn required_size(&self) -> usize {
        1usize << (self.deepest_index() + 4)
    }

    pub fn a(&self, l: u32) -> f64 {
        a_seq(l, self.epsilon)
    }

    /// Bubble levels `ℓ₀..=n`.
    pub fn levels(&self) -> core::ops::RangeInclusive<u32> {
        self.l0..=self.n
    }

    /// Unweighted component value at a point of [-1, 1)².
    pub fn component_at(&self, c: Component, x1: f64, x2: f64) -> f64 {
        match c {
            Component::Bubble(l) => phi_level(l, x1, x2),
            Component::SmallScale => phi_level(self.small_scale_index(), x1, x2),
            Component::Background => {
                if self.background {
                    background_omega_tilde(x1, x2, self.l0)
                } else {
                    0.0
                }
            }
        }
    }

    /// Weight of a component inside `ω₀,ₙ` (amplitude included).
    pub fn weight(&self, c: Component) -> f64 {
        self.amplitude
            * match c {
                Component::Bubble(l) => self.a(l),
                Component::SmallScale => self.small_scale_amplitude,
                Component::Background => {
                    if self.background {
                        1.0
                    } else {
                        0.0
                    }
                }
            }
    }

    /// All components with nonzero weight, coarse to fine.
    pub fn components(&self) -> Vec<Component> {
        let mut out = Vec::new();
        if self.background {
            out.push(Component::Background);
        }
        out.extend(self.levels().map(Component::Bubble));
        if self.small_scale_amplitude != 0.0 {
            out.push(Component::SmallScale);
        }
        out
    }

    /// `ω₀,ₙ(x)`.
    pub fn omega0_at(&self, x1: f64, x2: f64) -> f64 {
        let mut v = 0.0;
        if self.small_scale_amplitude != 0.0 {
            v += self.small_scale_amplitude * phi_level(self.small_scale_index(), x1, x2);
        }
        if self.background {
            v += background_omega_tilde(x1, x2, self.l0);
        }
        for l in self.levels() {
            v += self.a(l) * phi_level(l, x1, x2);
        }
        self.amplitude * v
    }

    pub fn partial_sums(&self) -> PartialSums {
        partial_sums(self)
    }
}

/// Blob multiplier `1 / (S_n δ)^{c₀/4}` of the vanishing-blob variant.
pub fn vanishing_blob_amplitude(s_n: f64, delta: f64, c0: f64) -> f64 {
    (s_n * delta).powf(-c0 / 4.0)
}

/// `S_k` for `k = 0..=n`: `S_k = 1` below `ℓ₀`, then `S_k = S_{k−1} + a_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSums {
    values: Vec<f64>,
}

impl PartialSums {
    pub fn get(&self, k: u32) -> f64 {
        self.values[k as usize]
    }

    /// `S_n`.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("S_0 is always present")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

pub fn partial_sums(cfg: &BubbleConfig) -> PartialSums {
    let mut values = Vec::with_capacity(cfg.n as usize + 1);
    values.push(1.0);
    for k in 1..=cfg.n {
        let prev = values[k as usize - 1];
        values.push(if k >= cfg.l0 { prev + cfg.a(k) } else { prev });
    }
    PartialSums { values }
}

/// `ω₀,ₙ` sampled on the grid of `spectral`.
pub fn assemble_omega0(cfg: &BubbleConfig, spectral: &Arc<Spectral>) -> Result<SpectralScalarField, Error> {
    cfg.validate()?;
    let size = spectral.size();
    let required = cfg.required_size();
    if size < required {
        return Err(Error::UnderResolved { size, required });
    }
    Ok(SpectralScalarField::from_fn(spectral, |x1, x2| cfg.omega0_at(x1, x2)))
}

/// One unweighted component sampled on the grid.
pub fn assemble_component(
    cfg: &BubbleConfig,
    c: Component,
    spectral: &Arc<Spectral>,
) -> SpectralScalarField {
    SpectralScalarField::from_fn(spectral, |x1, x2| cfg.component_at(c, x1, x2))
}

/// `g(r) sin 2θ` with `g(r) = |ln r|^{-1/2-ε}`, cut off smoothly on
/// `1/2 ≤ r ≤ 3/4`.
pub fn continuum_profile(x1: f64, x2: f64, epsilon: f64) -> f64 {
    let r2 = x1 * x1 + x2 * x2;
    if r2 == 0.0 {
        return 0.0;
    }
    let r = r2.sqrt();
    let cut = 1.0 - smooth_step(4.0 * (r - 0.5));
    if cut == 0.0 {
        return 0.0;
    }
    let g = (-r.ln()).powf(-0.5 - epsilon);
    g * 2.0 * x1 * x2 / r2 * cut
}

/// Continuum bubbles mollified at scale `2^{-level-1}` by discrete periodic
/// convolution with a normalized radial bump.
pub fn continuum_data(
    spectral: &Arc<Spectral>,
    epsilon: f64,
    level: u32,
) -> Result<SpectralScalarField, Error> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::InvalidConfig("epsilon must lie in (0, 1/4)"));
    }
    let radius = (-(level as f64) - 1.0).exp2();
    let h = spectral.grid().spacing();
    if radius < 2.0 * h {
        return Err(Error::UnderResolved {
            size: spectral.size(),
            required: (2.0 * 2.0 / radius) as usize,
        });
    }
    let mut f = SpectralScalarField::from_fn(spectral, |x1, x2| continuum_profile(x1, x2, epsilon));
    // Kernel ρ(x / radius) with ρ supported in the unit disk (bump has support 1/4).
    let mut k = SpectralScalarField::from_fn(spectral, |x1, x2| bump(x1.hypot(x2) / radius * 0.25));
    let mass: f64 = k.samples().iter().sum();
    let kc = k.coeffs().to_vec();
    let n2 = spectral.grid().len() as f64;
    for (c, w) in f.coeffs_mut().iter_mut().zip(&kc) {
        // Discrete convolution: ĉ · (N² k̂) / Σk.
        *c *= w.re * n2 / mass;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;

    #[test]
    fn a_seq_values() {
        assert_eq!(a_seq(1, 0.125), 1.0);
        assert!((a_seq(10, 0.125) - 0.237_137_370_566_166_1).abs() < 1e-12);
    }

    #[test]
    fn a_over_s_sums_to_log_s() {
        let cfg = BubbleConfig { l0: 10, n: 1_000_000, small_scale_amplitude: 0.0, ..Default::default() };
        let s = partial_sums(&cfg);
        let sum: f64 = (10..=cfg.n).map(|l| cfg.a(l) / s.get(l)).sum();
        let log_s = s.last().ln();
        assert!((sum - log_s).abs() < 0.1 * log_s, "{sum} vs {log_s}");
    }

    #[test]
    fn partial_sums_recurrence() {
        let cfg = BubbleConfig { l0: 1, n: 100, small_scale_amplitude: 0.0, background: false, ..Default::default() };
        let s = partial_sums(&cfg);
        assert_eq!(s.get(0), 1.0);
        assert_eq!(s.get(1), 1.0 + a_seq(1, 0.125));
        let direct = 1.0 + (1..=100).map(|l| (l as f64).powf(-0.625)).sum::<f64>();
        assert!((s.last() - direct).abs() < 1e-12);
        assert!(s.as_slice().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bump_plateaus_and_monotone() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(0.125), 1.0);
        assert_eq!(bump(0.25), 0.0);
        assert_eq!(bump(0.3), 0.0);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = bump(0.125 + 0.125 * i as f64 / 1000.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn phi0_values() {
        assert_eq!(phi0(1.0, 1.0), 1.0);
        assert_eq!(phi0(-1.0, 1.0), -1.0);
        assert_eq!(phi0(0.0, 0.0), 0.0);
    }

    #[test]
    fn background_values() {
        assert_eq!(background_omega_tilde(0.5, 0.5, 10), 1.0);
        assert_eq!(background_omega_tilde((-10.0f64 + 1.0).exp2(), 0.5, 10), 0.0);
        assert_eq!(background_omega_tilde(-0.5, 0.5, 10), -1.0);
    }

    #[test]
    fn omega0_point_values() {
        let cfg = BubbleConfig::default();
        let p = (-10.0f64).exp2();
        assert!((cfg.omega0_at(p, p) - 0.237_137_370_566_166_1).abs() < 1e-12);
        let q = (-20.0f64).exp2();
        assert_eq!(cfg.omega0_at(q, q), 1.0);
    }

    #[test]
    fn validation() {
        assert!(BubbleConfig::default().validate().is_ok());
        let bad = BubbleConfig { l0: 4, n: 4, ..Default::default() };
        assert!(bad.validate().is_err());
        let ok = BubbleConfig { l0: 1, n: 2, background: false, ..Default::default() };
        assert!(ok.validate().is_ok());
        assert_eq!(ok.required_size(), 256);
        let eps = BubbleConfig { epsilon: 0.3, ..Default::default() };
        assert!(eps.validate().is_err());
    }

    #[test]
    fn under_resolved_is_rejected() {
        let cfg = BubbleConfig { l0: 1, n: 2, background: false, ..Default::default() };
        let s = Spectral::radix2(Grid::new(128).unwrap());
        assert_eq!(
            assemble_omega0(&cfg, &s).unwrap_err(),
            Error::UnderResolved { size: 128, required: 256 }
        );
    }

    #[test]
    fn assembled_data_is_odd_odd_with_disjoint_supports() {
        let cfg = BubbleConfig { l0: 1, n: 2, background: false, ..Default::default() };
        let s = Spectral::radix2(Grid::new(256).unwrap());
        let mut w = assemble_omega0(&cfg, &s).unwrap();
        assert_eq!(w.odd_odd_residual(), 0.0);
        assert!((w.norms().linf - 1.0).abs() < 1e-15);
        let comps = cfg.components();
        let fields: Vec<Vec<f64>> =
            comps.iter().map(|&c| assemble_component(&cfg, c, &s).into_samples()).collect();
        for i in 0..fields.len() {
            for j in i + 1..fields.len() {
                assert!(fields[i].iter().zip(&fields[j]).all(|(a, b)| a * b == 0.0));
            }
        }
    }

    #[test]
    fn background_is_disjoint_from_bubbles() {
        let cfg = BubbleConfig { l0: 5, n: 6, small_scale_index: Some(7), ..Default::default() };
        let s = Spectral::radix2(Grid::new(2048).unwrap());
        let g = s.grid();
        let n = g.size();
        for i in 0..n / 2 {
            for j in 0..n / 2 {
                let (x1, x2) = (g.coord(i), g.coord(j));
                let bg = cfg.component_at(Component::Background, x1, x2);
                if bg == 0.0 {
                    continue;
                }
                for c in cfg.components() {
                    if c != Component::Background {
                        assert_eq!(cfg.component_at(c, x1, x2), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn continuum_profile_values() {
        let r = (-1.0f64).exp();
        let t = core::f64::consts::FRAC_PI_4;
        assert!((continuum_profile(r * t.cos(), r * t.sin(), 0.125) - 1.0).abs() < 1e-12);
        assert!(continuum_profile(0.0, r, 0.125).abs() < 1e-15);
    }

    #[test]
    fn continuum_data_is_odd_odd() {
        let s = Spectral::radix2(Grid::new(128).unwrap());
        let mut f = continuum_data(&s, 0.125, 3).unwrap();
        assert!(f.odd_odd_residual() < 1e-12);
    }
}
