//! Bracketed root finding: plain bisection and the Illinois variant of
//! regula falsi with a bisection safeguard.

use crate::error::{Error, Result};

/// Finds a sign change of `f` on `[lo, hi]` by bisection.
///
/// `lo_negative` states the sign of `f` at `lo`; the endpoints themselves are
/// never evaluated, so they may sit on a pole or outside the domain of `f`.
/// Stops once the bracket is narrower than `rel_tol * max(|lo|, |hi|) + abs_tol`.
pub fn bisect<F>(
    mut lo: f64,
    mut hi: f64,
    lo_negative: bool,
    rel_tol: f64,
    abs_tol: f64,
    what: &'static str,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) {
        return Err(Error::BracketFailure { what, lo, hi });
    }
    for _ in 0..400 {
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()) + abs_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let value = f(mid)?;
        if value == 0.0 {
            return Ok(mid);
        }
        if (value < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finds a root of a continuous `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of
/// opposite signs. Illinois steps keep the bracket; whenever two consecutive
/// steps fail to halve it a bisection step is forced, so the bracket shrinks
/// at least as fast as bisection every third evaluation.
#[allow(clippy::too_many_arguments)]
pub fn illinois<F>(
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    mut f_hi: f64,
    rel_tol: f64,
    abs_tol: f64,
    what: &'static str,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !(f_lo * f_hi <= 0.0) || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::BracketFailure { what, lo, hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    // 0: last step moved lo, 1: moved hi
    let mut last_side: Option<bool> = None;
    let mut widths = [hi - lo; 2];
    for _ in 0..400 {
        let width = hi - lo;
        if width <= rel_tol * lo.abs().max(hi.abs()) + abs_tol {
            break;
        }
        let force_bisect = width > 0.5 * widths[0];
        let mut x = if force_bisect {
            0.5 * (lo + hi)
        } else {
            (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        widths = [widths[1], width];
        let fx = f(x)?;
        if fx.is_nan() {
            return Err(Error::SolverFailure(format!("{what}: NaN at {x}")));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        let moves_hi = (fx > 0.0) == (f_hi > 0.0);
        if moves_hi {
            hi = x;
            f_hi = fx;
            if last_side == Some(true) {
                f_lo *= 0.5;
            }
        } else {
            lo = x;
            f_lo = fx;
            if last_side == Some(false) {
                f_hi *= 0.5;
            }
        }
        last_side = Some(moves_hi);
    }
    Ok((lo * f_hi - hi * f_lo) / (f_hi - f_lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(0.0, 2.0, true, 1e-14, 0.0, "sqrt2", |x| Ok(x * x - 2.0)).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn handles_decreasing_functions_and_poles() {
        // 1/x - 1 on (0, 2]: positive near the pole at 0, root at 1
        let r = bisect(0.0, 2.0, false, 1e-13, 0.0, "pole", |x| Ok(1.0 / x - 1.0)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn illinois_matches_bisection_with_fewer_evaluations() {
        let mut calls = 0;
        let r = illinois(0.0, -2.0, 2.0, 2.0, 1e-14, 0.0, "sqrt2", |x| {
            calls += 1;
            Ok(x * x - 2.0)
        })
        .unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(calls < 20, "{calls}");
    }

    #[test]
    fn illinois_survives_flat_functions() {
        // steep on one side, flat on the other: regula falsi alone stalls here
        let g = |x: f64| Ok((x - 0.3).powi(9) + 1e-9 * (x - 0.3));
        let r = illinois(
            -1.0,
            g(-1.0).unwrap(),
            3.0,
            g(3.0).unwrap(),
            1e-12,
            1e-15,
            "flat",
            g,
        )
        .unwrap();
        assert!((r - 0.3).abs() < 1e-6);
    }

    #[test]
    fn illinois_requires_sign_change() {
        assert!(illinois(0.0, 1.0, 1.0, 2.0, 1e-10, 0.0, "same", Ok).is_err());
    }

    #[test]
    fn rejects_empty_bracket() {
        assert!(bisect(1.0, 1.0, true, 1e-10, 0.0, "empty", Ok).is_err());
    }
}
