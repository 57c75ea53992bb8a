//! Transform context: grid, FFT backend, wavenumber tables and the spectral
//! multipliers shared by fields, the solver and the diagnostics.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::fft::{forward_2d, inverse_2d, FftEngine, Radix2};
use crate::grid::{Grid, PERIOD};
use crate::{Complex64, Error};

const AREA: f64 = PERIOD * PERIOD;

/// Derivative direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

pub struct Spectral {
    grid: Grid,
    engine: Arc<dyn FftEngine>,
    k: Vec<f64>,
    // Nyquist zeroed: odd multipliers must keep real fields real.
    k_odd: Vec<f64>,
    retained: Vec<bool>,
}

impl core::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid, engine: Arc<dyn FftEngine>) -> Result<Self, Error> {
        let n = grid.size();
        if engine.len() != n {
            return Err(Error::GridMismatch { expected: n, found: engine.len() });
        }
        let k: Vec<f64> = (0..n).map(|p| grid.wavenumber(p)).collect();
        let k_odd = (0..n).map(|p| if p == n / 2 { 0.0 } else { k[p] }).collect();
        let cut = grid.dealias_cutoff() as i64;
        let retained = (0..n).map(|p| grid.mode(p).abs() <= cut).collect();
        Ok(Spectral { grid, engine, k, k_odd, retained })
    }

    /// Context backed by the portable radix-2 transform.
    pub fn radix2(grid: Grid) -> Arc<Self> {
        let engine = Arc::new(Radix2::new(grid.size()));
        Arc::new(Spectral::new(grid, engine).expect("radix-2 engine has the grid length"))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.size()
    }

    pub fn engine(&self) -> &dyn FftEngine {
        &*self.engine
    }

    pub fn wavenumber(&self, p: usize) -> f64 {
        self.k[p]
    }

    /// Wavenumber used by first-derivative multipliers (Nyquist → 0).
    pub fn wavenumber_odd(&self, p: usize) -> f64 {
        self.k_odd[p]
    }

    pub fn k_squared(&self, p: usize, q: usize) -> f64 {
        self.k[p] * self.k[p] + self.k[q] * self.k[q]
    }

    /// Whether mode `(p, q)` survives the 2/3 truncation.
    pub fn is_retained(&self, p: usize, q: usize) -> bool {
        self.retained[p] && self.retained[q]
    }

    /// Zeroed complex buffer of `n²` entries, usable as transform scratch.
    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.grid.len()]
    }

    fn check_len(&self, len: usize) {
        assert_eq!(len, self.grid.len(), "buffer does not match the grid");
    }

    /// Normalized coefficients of one real field.
    pub fn forward_real(&self, samples: &[f64], out: &mut [Complex64]) {
        self.check_len(samples.len());
        self.check_len(out.len());
        for (o, &s) in out.iter_mut().zip(samples) {
            *o = Complex64::new(s, 0.0);
        }
        forward_2d(self.engine(), out);
        let scale = 1.0 / self.grid.len() as f64;
        out.iter_mut().for_each(|c| *c *= scale);
    }

    /// Normalized coefficients of two real fields with a single complex FFT.
    pub fn forward_real_pair(
        &self,
        a: &[f64],
        b: &[f64],
        out_a: &mut [Complex64],
        out_b: &mut [Complex64],
        work: &mut [Complex64],
    ) {
        self.check_len(a.len());
        self.check_len(b.len());
        self.check_len(work.len());
        for ((w, &x), &y) in work.iter_mut().zip(a).zip(b) {
            *w = Complex64::new(x, y);
        }
        self.forward_packed(work, out_a, out_b);
    }

    /// Like [`Spectral::forward_real_pair`], with the two real fields already
    /// packed as `a + i b` in `work` (which is overwritten).
    pub fn forward_packed(&self, work: &mut [Complex64], out_a: &mut [Complex64], out_b: &mut [Complex64]) {
        let n = self.size();
        self.check_len(work.len());
        self.check_len(out_a.len());
        self.check_len(out_b.len());
        forward_2d(self.engine(), work);
        let scale = 0.5 / self.grid.len() as f64;
        for p in 0..n {
            let pm = self.grid.mirror(p);
            for q in 0..n {
                let qm = self.grid.mirror(q);
                let z = work[p * n + q];
                let zm = work[pm * n + qm].conj();
                out_a[p * n + q] = (z + zm) * scale;
                // (z - zm) / (2i)
                let d = z - zm;
                out_b[p * n + q] = Complex64::new(d.im, -d.re) * scale;
            }
        }
    }

    /// Samples of a real field from its (Hermitian) coefficients.
    pub fn inverse_real(&self, coeffs: &[Complex64], out: &mut [f64], work: &mut [Complex64]) {
        self.check_len(coeffs.len());
        self.check_len(out.len());
        self.check_len(work.len());
        work.copy_from_slice(coeffs);
        inverse_2d(self.engine(), work);
        for (o, w) in out.iter_mut().zip(work.iter()) {
            *o = w.re;
        }
    }

    /// Samples of two real fields from Hermitian coefficient arrays.
    pub fn inverse_real_pair(
        &self,
        ca: &[Complex64],
        cb: &[Complex64],
        out_a: &mut [f64],
        out_b: &mut [f64],
        work: &mut [Complex64],
    ) {
        self.check_len(ca.len());
        self.check_len(cb.len());
        self.check_len(work.len());
        for ((w, &x), &y) in work.iter_mut().zip(ca).zip(cb) {
            *w = x + Complex64::new(-y.im, y.re);
        }
        inverse_2d(self.engine(), work);
        for ((oa, ob), w) in out_a.iter_mut().zip(out_b.iter_mut()).zip(work.iter()) {
            *oa = w.re;
            *ob = w.im;
        }
    }

    /// `dst = ∂_axis src` in coefficient space.
    pub fn derivative(&self, src: &[Complex64], dst: &mut [Complex64], axis: Axis) {
        let n = self.size();
        for p in 0..n {
            for q in 0..n {
                let k = match axis {
                    Axis::X1 => self.k_odd[p],
                    Axis::X2 => self.k_odd[q],
                };
                let c = src[p * n + q];
                dst[p * n + q] = Complex64::new(-k * c.im, k * c.re);
            }
        }
    }

    /// `dst = Δ src` in coefficient space.
    pub fn laplacian(&self, src: &[Complex64], dst: &mut [Complex64]) {
        let n = self.size();
        for p in 0..n {
            for q in 0..n {
                dst[p * n + q] = src[p * n + q] * (-self.k_squared(p, q));
            }
        }
    }

    /// Velocity coefficients `u = ∇⊥Δ⁻¹ω`, i.e. `û = i k⊥ ω̂ / |k|²` with
    /// `k⊥ = (k₂, -k₁)`; the mean of ω is discarded.
    pub fn velocity(&self, omega: &[Complex64], u1: &mut [Complex64], u2: &mut [Complex64]) {
        let n = self.size();
        for p in 0..n {
            for q in 0..n {
                let i = p * n + q;
                let k2 = self.k_squared(p, q);
                if k2 == 0.0 {
                    u1[i] = Complex64::new(0.0, 0.0);
                    u2[i] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let c = omega[i] / k2;
                let ic = Complex64::new(-c.im, c.re);
                u1[i] = ic * self.k_odd[q];
                u2[i] = ic * (-self.k_odd[p]);
            }
        }
    }

    /// Zero every mode outside the 2/3 band.
    pub fn dealias(&self, coeffs: &mut [Complex64]) {
        let n = self.size();
        for p in 0..n {
            for q in 0..n {
                if !self.is_retained(p, q) {
                    coeffs[p * n + q] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// `‖f‖²_{L²}` over the torus via Parseval.
    pub fn l2_squared(&self, coeffs: &[Complex64]) -> f64 {
        AREA * coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `‖∇f‖²_{L²}`.
    pub fn h1_seminorm_squared(&self, coeffs: &[Complex64]) -> f64 {
        let n = self.size();
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                acc += self.k_squared(p, q) * coeffs[p * n + q].norm_sqr();
            }
        }
        AREA * acc
    }

    /// `‖u‖²_{L²}` of the velocity induced by the vorticity coefficients.
    pub fn energy_from_vorticity(&self, omega: &[Complex64]) -> f64 {
        let n = self.size();
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                let k2 = self.k_squared(p, q);
                if k2 > 0.0 {
                    // Nyquist rows carry no velocity (odd multipliers vanish there).
                    let kk = self.k_odd[p] * self.k_odd[p] + self.k_odd[q] * self.k_odd[q];
                    acc += kk * omega[p * n + q].norm_sqr() / (k2 * k2);
                }
            }
        }
        AREA * acc
    }

    /// Fraction of `Σ|f̂|²` over retained modes that sits in the outer third of
    /// the retained band (`2n/9 < max(|m1|, |m2|) ≤ n/3`).
    pub fn tail_fraction(&self, coeffs: &[Complex64]) -> f64 {
        let n = self.size();
        let cut = self.grid.dealias_cutoff() as i64;
        let inner = (2 * n / 9) as i64;
        let mut total = 0.0;
        let mut tail = 0.0;
        for p in 0..n {
            let mp = self.grid.mode(p).abs();
            for q in 0..n {
                let mq = self.grid.mode(q).abs();
                let m = mp.max(mq);
                if m > cut {
                    continue;
                }
                let e = coeffs[p * n + q].norm_sqr();
                total += e;
                if m > inner {
                    tail += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}
