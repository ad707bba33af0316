//! Scalar root finding for mixed-strategy indifference conditions.

/// Controls for [`bisect`]. Defaults: 200 iterations, residual tolerance
/// 1e-12, bracket-width tolerance 1e-14. The width tolerance is tight enough
/// that strategies solved numerically agree with algebraic closed forms to
/// well below 1e-12.
#[derive(Debug, Clone, Copy)]
pub struct BisectOptions {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub width_tol: f64,
}

impl Default for BisectOptions {
    fn default() -> Self {
        BisectOptions {
            max_iter: 200,
            residual_tol: 1e-12,
            width_tol: 1e-14,
        }
    }
}

/// Why a bisection could not run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BisectError {
    /// The function has the same sign at both bracket endpoints.
    NoBracket { f_lo: f64, f_hi: f64 },
    /// An endpoint evaluated to a non-finite value.
    NonFinite,
}

/// Find a root of `f` on `[lo, hi]` by bisection. Stops when the residual
/// falls below `residual_tol` or the bracket narrows below `width_tol`;
/// either way the returned point's bracket width bounds its error.
pub fn bisect(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    opt: &BisectOptions,
) -> Result<f64, BisectError> {
    let f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(BisectError::NonFinite);
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(BisectError::NoBracket { f_lo, f_hi });
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f_lo;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..opt.max_iter {
        mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(BisectError::NonFinite);
        }
        if f_mid == 0.0 || (f_mid.abs() <= opt.residual_tol && hi - lo <= opt.width_tol) {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= opt.width_tol {
            return Ok(0.5 * (lo + hi));
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_a_simple_root() {
        let root = bisect(|x| x * x - 2.0, 0.0, 2.0, &BisectOptions::default()).unwrap();
        assert!((root - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn reports_missing_bracket() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, &BisectOptions::default()).unwrap_err();
        assert!(matches!(err, BisectError::NoBracket { .. }));
    }

    #[test]
    fn exact_endpoint_roots_are_returned() {
        let root = bisect(|x| x, 0.0, 1.0, &BisectOptions::default()).unwrap();
        assert_eq!(root, 0.0);
    }

    #[test]
    fn flat_shallow_functions_converge_by_width() {
        // Slope 1e-6 near the root: the residual alone would stall above
        // 1e-12 long after the root is pinned; width convergence takes over.
        let root = bisect(|x| 1e-6 * (x - 0.3), 0.0, 1.0, &BisectOptions::default()).unwrap();
        assert!((root - 0.3).abs() < 1e-13);
    }
}
