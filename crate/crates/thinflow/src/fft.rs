//! `rustfft` backend for the core transforms.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use thinflow_core::fft::FftEngine;
use thinflow_core::{Complex64, Error, Grid, Spectral};

/// Planned forward and inverse transforms of one length.
pub struct RustFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RustFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        RustFft { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }
}

impl FftEngine for RustFft {
    fn len(&self) -> usize {
        self.n
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
    }

    fn forward_2d(&self, data: &mut [Complex64]) {
        self.transform_2d(&*self.forward, data);
    }

    fn inverse_2d(&self, data: &mut [Complex64]) {
        self.transform_2d(&*self.inverse, data);
    }
}

thread_local! {
    static SCRATCH: RefCell<(Vec<Complex64>, Vec<Complex64>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

impl RustFft {
    /// Rows, out-of-place transpose, rows, transpose back.
    fn transform_2d(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.n;
        SCRATCH.with(|cell| {
            let mut guard = cell.borrow_mut();
            let (tmp, scratch) = &mut *guard;
            tmp.resize(data.len(), Complex64::new(0.0, 0.0));
            scratch.resize(fft.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
            fft.process_with_scratch(data, scratch);
            transpose::transpose(data, tmp, n, n);
            fft.process_with_scratch(tmp, scratch);
            transpose::transpose(tmp, data, n, n);
        });
    }
}

/// Spectral context on an `n × n` grid backed by `rustfft`.
pub fn spectral(n: usize) -> Result<Arc<Spectral>, Error> {
    let grid = Grid::new(n)?;
    Ok(Arc::new(Spectral::new(grid, Arc::new(RustFft::new(n)))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use thinflow_core::fft::Radix2;

    #[test]
    fn agrees_with_radix2() {
        let n = 64;
        let data: Vec<Complex64> =
            (0..3 * n).map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos())).collect();
        let (mut a, mut b) = (data.clone(), data.clone());
        RustFft::new(n).forward(&mut a);
        Radix2::new(n).forward(&mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
        RustFft::new(n).inverse(&mut a);
        for (x, y) in a.iter().zip(&data) {
            assert!((x / n as f64 - y).norm() < 1e-13);
        }
    }

    #[test]
    fn two_dimensional_agrees_with_radix2() {
        let n = 32;
        let data: Vec<Complex64> =
            (0..n * n).map(|j| Complex64::new((j as f64 * 0.91).sin(), (j as f64 * 0.2).cos())).collect();
        let (mut a, mut b) = (data.clone(), data.clone());
        RustFft::new(n).forward_2d(&mut a);
        Radix2::new(n).forward_2d(&mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-11);
        }
        RustFft::new(n).inverse_2d(&mut a);
        Radix2::new(n).inverse_2d(&mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }
}
