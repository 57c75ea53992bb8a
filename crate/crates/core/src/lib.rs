//! Pseudospectral 2D vorticity dynamics on the torus (ℝ/2ℤ)².
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches the
//! filesystem, threads or the command line lives in the `thinflow` crate;
//! the FFT backend is pluggable through [`fft::FftEngine`] so the std side
//! can hand in a SIMD implementation while this crate ships a portable
//! radix-2 transform.
//!
//! Layout conventions used throughout:
//!
//! * samples and coefficients are stored row-major, `index = i1 * n + i2`,
//!   where `i1` runs along x₁ and `i2` along x₂;
//! * sample `(i1, i2)` sits at `x = (i1 h, i2 h)` with `h = 2 / n`;
//! * Fourier coefficients are averages (DFT divided by `n²`), and the
//!   physical wavevector of index `(m1, m2)` is `π (m1, m2)`.

#![cfg_attr(not(test), no_std)]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

mod error;
pub mod fft;
pub mod field;
pub mod fit;
pub mod grid;
pub mod initial_data;
pub mod key_integral;
pub mod lagrangian;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::Error;
pub use field::{Norms, SpectralScalarField, VelocityField};
pub use grid::Grid;
pub use initial_data::{BubbleConfig, PartialSums};
pub use solver::{FlowState, Solver, SolverConfig};
pub use spectral::Spectral;

pub type Complex64 = num_complex::Complex<f64>;
