//! Bracketed bisection.
//!
//! Near the neutral fixed point the branch derivative tends to one, so
//! derivative-based solvers gain nothing; bisection keeps the bracket
//! guarantee all the way down.

/// Absolute tolerance on the bracket width.
pub const BISECTION_TOL: f64 = 1e-15;

/// Iteration cap for [`bisect`].
pub const BISECTION_MAX_ITER: usize = 200;

/// Finds a root of `f` in `[lo, hi]`, assuming `f(lo)` and `f(hi)` do not
/// share a strict sign. Returns `None` when the root is not bracketed.
///
/// Iteration stops once the bracket is narrower than `tol`, once the
/// midpoint is no longer representable strictly inside the bracket, or after
/// `max_iter` halvings.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if !flo.is_finite() || !fhi.is_finite() || flo.signum() == fhi.signum() {
        return None;
    }
    let lo_negative = flo < 0.0;
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo + 0.5 * (hi - lo))
}
