//! Binary vorticity snapshots.
//!
//! Layout, all little-endian: the 9 magic bytes `THINFLOW1`, `u32` grid size
//! `N`, `f64` time, `f64` viscosity, then the `N²` vorticity samples as `f64`
//! in row-major order (`i1 * N + i2`).

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::Arc;

use thinflow_core::{SpectralScalarField, Spectral};

use crate::fft;

pub const MAGIC: &[u8; 9] = b"THINFLOW1";

/// A decoded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub n: usize,
    pub t: f64,
    pub nu: f64,
    pub samples: Vec<f64>,
}

impl Checkpoint {
    pub fn from_field(field: &mut SpectralScalarField, t: f64, nu: f64) -> Self {
        let n = field.grid().size();
        Checkpoint { n, t, nu, samples: field.samples().to_vec() }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + 4 + 16 + 8 * self.samples.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&self.nu.to_le_bytes());
        for v in &self.samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let mut r = bytes;
        let mut magic = [0u8; 9];
        r.read_exact(&mut magic).map_err(|_| bad("checkpoint truncated"))?;
        if &magic != MAGIC {
            return Err(bad("not a thinflow checkpoint"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4).map_err(|_| bad("checkpoint truncated"))?;
        let n = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8).map_err(|_| bad("checkpoint truncated"))?;
        let t = f64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(|_| bad("checkpoint truncated"))?;
        let nu = f64::from_le_bytes(b8);
        if r.len() != 8 * n * n {
            return Err(bad("checkpoint size does not match its grid"));
        }
        let samples = r.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
        Ok(Checkpoint { n, t, nu, samples })
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.encode())?;
        f.sync_all()
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        Checkpoint::decode(&fs::read(path)?)
    }

    /// The vorticity on a fresh `rustfft`-backed grid.
    pub fn field(&self) -> Result<SpectralScalarField, thinflow_core::Error> {
        let spectral: Arc<Spectral> = fft::spectral(self.n)?;
        SpectralScalarField::from_samples(&spectral, self.samples.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let c = Checkpoint { n: 16, t: 0.1 + 0.2, nu: 1e-3 / 3.0, samples: (0..256).map(|i| (i as f64).sin()).collect() };
        let d = Checkpoint::decode(&c.encode()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Checkpoint::decode(b"THINFLOW2xxxx").is_err());
        let mut bytes = Checkpoint { n: 16, t: 0.0, nu: 0.0, samples: vec![0.0; 256] }.encode();
        bytes.pop();
        assert!(Checkpoint::decode(&bytes).is_err());
    }
}
