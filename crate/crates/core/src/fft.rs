//! One-dimensional FFT backends and the square 2D transform built on them.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::Complex64;

/// Unnormalized in-place complex transforms of a fixed length.
///
/// `data.len()` is always a multiple of [`FftEngine::len`]; each consecutive
/// chunk is transformed independently. `forward` uses `exp(-2πi jk/n)`,
/// `inverse` uses `exp(+2πi jk/n)`, neither divides by `n`.
pub trait FftEngine: Send + Sync {
    fn len(&self) -> usize;
    fn forward(&self, data: &mut [Complex64]);
    fn inverse(&self, data: &mut [Complex64]);

    /// 2D forward transform of a `len × len` row-major array.
    fn forward_2d(&self, data: &mut [Complex64]) {
        self.forward(data);
        column_pass(self, data, false);
    }

    /// 2D inverse transform of a `len × len` row-major array.
    fn inverse_2d(&self, data: &mut [Complex64]) {
        self.inverse(data);
        column_pass(self, data, true);
    }
}

/// Iterative radix-2 Cooley-Tukey transform.
pub struct Radix2 {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Radix2 {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "radix-2 length must be a power of two");
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Radix2 { n, twiddles, bitrev }
    }

    fn transform(&self, chunk: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                chunk.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = chunk[start + k];
                    let b = chunk[start + k + half] * w;
                    chunk[start + k] = a + b;
                    chunk[start + k + half] = a - b;
                }
            }
            len *= 2;
        }
    }
}

impl FftEngine for Radix2 {
    fn len(&self) -> usize {
        self.n
    }

    fn forward(&self, data: &mut [Complex64]) {
        for chunk in data.chunks_exact_mut(self.n) {
            self.transform(chunk, false);
        }
    }

    fn inverse(&self, data: &mut [Complex64]) {
        for chunk in data.chunks_exact_mut(self.n) {
            self.transform(chunk, true);
        }
    }
}

/// In-place transpose of a square row-major matrix.
pub fn transpose_square(data: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    assert_eq!(data.len(), n * n);
    for bi in (0..n).step_by(BLOCK) {
        let ei = (bi + BLOCK).min(n);
        // Diagonal block.
        for i in bi..ei {
            for j in (i + 1)..ei {
                data.swap(i * n + j, j * n + i);
            }
        }
        for bj in (ei..n).step_by(BLOCK) {
            let ej = (bj + BLOCK).min(n);
            for i in bi..ei {
                // Row i of the upper block against column i of the lower one.
                let (head, tail) = data.split_at_mut(bj * n);
                let row = &mut head[i * n + bj..i * n + ej];
                for (k, a) in row.iter_mut().enumerate() {
                    core::mem::swap(a, &mut tail[k * n + i]);
                }
            }
        }
    }
}

/// Transform every column, a tile of columns at a time.
fn column_pass<E: FftEngine + ?Sized>(engine: &E, data: &mut [Complex64], inverse: bool) {
    const TILE: usize = 16;
    let n = engine.len();
    let width = TILE.min(n);
    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); n * width];
    for c0 in (0..n).step_by(width) {
        for (k, col) in buf.chunks_exact_mut(n).enumerate() {
            for (dst, row) in col.iter_mut().zip(data.chunks_exact(n)) {
                *dst = row[c0 + k];
            }
        }
        if inverse {
            engine.inverse(&mut buf);
        } else {
            engine.forward(&mut buf);
        }
        for (k, col) in buf.chunks_exact(n).enumerate() {
            for (src, row) in col.iter().zip(data.chunks_exact_mut(n)) {
                row[c0 + k] = *src;
            }
        }
    }
}

/// Unnormalized 2D forward transform of an `n × n` row-major array.
pub fn forward_2d(engine: &dyn FftEngine, data: &mut [Complex64]) {
    engine.forward_2d(data);
}

/// Unnormalized 2D inverse transform of an `n × n` row-major array.
pub fn inverse_2d(engine: &dyn FftEngine, data: &mut [Complex64]) {
    engine.inverse_2d(data);
}
