//! Bracketed bisection on a logarithmic scale for increasing functions of `t > 0`.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const T_MIN: f64 = 1e-300;
const T_MAX: f64 = 1e300;

/// Solve `f(t) = target` for an increasing `f : (0, inf) -> (0, inf)`.
///
/// The bracket starts at `[1, 1]` and grows geometrically in both directions
/// until it encloses the target. Iteration stops once the residual is below
/// `rel_tol * target` or the bracket has collapsed to adjacent floats.
pub fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64, rel_tol: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::BracketFailure { target });
    }
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    while f(lo) > target {
        lo *= 1e-3;
        if lo < T_MIN {
            return Err(Error::BracketFailure { target });
        }
    }
    while f(hi) < target {
        hi *= 1e3;
        if hi > T_MAX {
            return Err(Error::BracketFailure { target });
        }
    }
    if lo == hi {
        return Ok(lo);
    }
    for _ in 0..MAX_ITER {
        let mid = lo.sqrt() * hi.sqrt();
        let v = f(mid);
        if (v - target).abs() <= rel_tol * target {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi <= lo * (1.0 + 4.0 * f64::EPSILON) {
            return Ok(mid);
        }
    }
    Ok(lo.sqrt() * hi.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_by_bisection() {
        let t = solve_increasing(|t| t * t, 2.0, 1e-14).unwrap();
        assert!((t - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn tiny_and_huge_targets() {
        let t = solve_increasing(|t| t, 1e-200, 1e-12).unwrap();
        assert!((t / 1e-200 - 1.0).abs() < 1e-11);
        let t = solve_increasing(|t| t.powi(2), 1e200, 1e-12).unwrap();
        assert!((t / 1e100 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn bounded_function_fails_to_bracket() {
        let r = solve_increasing(|t| t / (1.0 + t), 2.0, 1e-12);
        assert!(matches!(r, Err(Error::BracketFailure { .. })));
    }
}
