use core::f64::consts::PI;

use crate::Error;

/// Side length of the periodic box.
pub const PERIOD: f64 = 2.0;

/// Uniform `n × n` collocation grid on (ℝ/2ℤ)².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self, Error> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid { size: n });
        }
        Ok(Grid { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Number of samples, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        PERIOD / self.n as f64
    }

    /// Sample coordinate of index `i`, as the representative in [-1, 1).
    pub fn coord(&self, i: usize) -> f64 {
        let x = i as f64 * self.spacing();
        if x >= 1.0 {
            x - PERIOD
        } else {
            x
        }
    }

    /// Signed integer wavenumber of storage index `p` (Nyquist maps to `-n/2`).
    pub fn mode(&self, p: usize) -> i64 {
        let p = p as i64;
        let n = self.n as i64;
        if p >= n / 2 {
            p - n
        } else {
            p
        }
    }

    /// Physical wavenumber `π m` of storage index `p`.
    pub fn wavenumber(&self, p: usize) -> f64 {
        PI * self.mode(p) as f64
    }

    /// Storage index of the mirrored mode `-m`.
    pub fn mirror(&self, p: usize) -> usize {
        (self.n - p) % self.n
    }

    /// Largest retained index under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }
}

/// Representative of `x` in [-1, 1).
pub fn wrap(x: f64) -> f64 {
    if (-1.0..1.0).contains(&x) {
        return x;
    }
    let mut y = libm_rem(x + 1.0, PERIOD);
    if y < 0.0 {
        y += PERIOD;
    }
    let r = y - 1.0;
    if r >= 1.0 {
        -1.0
    } else {
        r
    }
}

fn libm_rem(a: f64, b: f64) -> f64 {
    a - b * num_traits::Float::floor(a / b)
}

/// Minimal-image difference `a - b` on the torus, componentwise.
pub fn torus_delta(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [wrap(a[0] - b[0]), wrap(a[1] - b[1])]
}
