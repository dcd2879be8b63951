//! Composite quadrature on uniform grids.

use crate::error::{Error, Result};

/// Composite Simpson rule for samples `f[0..=m]` spaced by `h`; `m` must be even.
pub fn simpson(f: &[f64], h: f64) -> Result<f64> {
    let m = f.len().saturating_sub(1);
    if m == 0 || m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Simpson rule needs an even number of intervals, got {m}"
        )));
    }
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in f.iter().enumerate().take(m).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(h / 3.0 * (f[0] + f[m] + 4.0 * odd + 2.0 * even))
}

/// Composite trapezoid rule.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (f[0] + f[n - 1]) + f[1..n - 1].iter().sum::<f64>()),
    }
}

/// Second-order finite-difference derivative of uniformly spaced samples,
/// one-sided at both ends.
pub fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}
