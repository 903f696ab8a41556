//! Bracketing and bisection for scalar equations.

/// Result of a bisection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    /// Final bracket; `f(lo)` and `f(hi)` have opposite signs (or one is zero).
    pub lo: f64,
    pub hi: f64,
    pub iterations: u32,
    pub converged: bool,
}

/// Grows `hi = lo * factor^n` until `f(hi)` has the opposite sign of `f(lo)`.
///
/// Returns `(a, b)` with the sign change inside `[a, b]`, or `None` if `limit` is
/// passed first.
pub fn expand_bracket<F>(f: F, lo: f64, limit: f64, factor: f64) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo > 0.0 && factor > 1.0);
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return Some((lo, lo));
    }
    let mut a = lo;
    loop {
        let b = (a * factor).min(limit);
        let f_b = f(b);
        if f_b == 0.0 || f_b.signum() != f_lo.signum() {
            return Some((a, b));
        }
        if b >= limit {
            return None;
        }
        a = b;
    }
}

/// Bisects `[lo, hi]` until it is no wider than `tol` and `|f(mid)| <= tol`, or until
/// the bracket cannot be split further in floating point. The returned root is the
/// last midpoint evaluated, so it satisfies the residual bound.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: u32) -> Bisection
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Bisection { root: lo, lo, hi: lo, iterations: 0, converged: true };
    }
    if f_hi == 0.0 {
        return Bisection { root: hi, lo: hi, hi, iterations: 0, converged: true };
    }
    debug_assert!(f_lo.signum() != f_hi.signum(), "bisect needs a sign change");

    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // adjacent floats
            return Bisection { root: mid, lo, hi, iterations, converged: true };
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Bisection { root: mid, lo: mid, hi: mid, iterations, converged: true };
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol && f_mid.abs() <= tol {
            return Bisection { root: mid, lo, hi, iterations, converged: true };
        }
    }
    let root = 0.5 * (lo + hi);
    Bisection {
        root,
        lo,
        hi,
        iterations,
        converged: hi - lo <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let f = |x: f64| x * x - 2.0;
        let (a, b) = expand_bracket(f, 1e-6, 1e6, 2.0).unwrap();
        let r = bisect(f, a, b, 1e-12, 200);
        assert!(r.converged);
        assert!((r.root - core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_below_limit() {
        assert!(expand_bracket(|x: f64| x + 1.0, 1e-6, 1e6, 2.0).is_none());
    }

    #[test]
    fn bracket_stops_exactly_at_limit() {
        let (_, b) = expand_bracket(|x: f64| 10.0 - x, 1.0, 10.0, 3.0).unwrap();
        assert_eq!(b, 10.0);
    }
}
