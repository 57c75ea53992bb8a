//! Ordinary least squares for the scaling fits.

#[allow(unused_imports)]
use num_traits::Float;

use crate::Error;

/// Straight-line fit `y ≈ intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 for exactly collinear data).
    pub slope_se: f64,
    pub intercept_se: f64,
    pub r_squared: f64,
    /// Residual degrees of freedom, `points - 2`.
    pub dof: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, Error> {
    assert_eq!(x.len(), y.len(), "abscissae and ordinates differ in length");
    let m = x.len();
    if m < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: m });
    }
    let mf = m as f64;
    let xm = x.iter().sum::<f64>() / mf;
    let ym = y.iter().sum::<f64>() / mf;
    let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let syy: f64 = y.iter().map(|v| (v - ym) * (v - ym)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let dof = m - 2;
    let (slope_se, intercept_se) = if dof == 0 {
        (0.0, 0.0)
    } else {
        let s2 = rss / dof as f64;
        ((s2 / sxx).sqrt(), (s2 * (1.0 / mf + xm * xm / sxx)).sqrt())
    };
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - rss / syy };
    Ok(LinearFit { slope, intercept, slope_se, intercept_se, r_squared, dof })
}

/// Fit of `log y` against `log x`; all values must be positive.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, Error> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidConfig("log-log fit needs positive data"));
    }
    let lx: alloc::vec::Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: alloc::vec::Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}
