//! Scalar bracketing root finding and minimization.

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Requires `f(lo)` and `f(hi)` to have strictly opposite signs; returns
/// `None` otherwise. Stops once the bracket width is at most `rel_tol`
/// times its midpoint.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !(f_lo * f_hi < 0.0) {
        return None;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() || mid <= lo || mid >= hi {
            return Some(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// A triple `a < b < c` with `f(b) < f(a)` and `f(b) <= f(c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinBracket {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

const GOLDEN: f64 = 1.618_033_988_749_895;

/// Expand downhill from `a` with first step to `b` until the function turns
/// up again. Returns `None` if `f(b) >= f(a)` or the walk passes `ceiling`.
pub fn expand_bracket<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, ceiling: f64) -> Option<MinBracket> {
    let (mut a, mut b) = (a, b);
    let mut fb = f(b);
    if !(fb < f(a)) {
        return None;
    }
    let mut c = b + GOLDEN * (b - a);
    let mut fc = f(c);
    while fc < fb {
        if c > ceiling {
            return None;
        }
        a = b;
        b = c;
        fb = fc;
        c = b + GOLDEN * (b - a);
        fc = f(c);
    }
    Some(MinBracket { a, b, c })
}

/// Golden-section search on `[a, b]` until the interval is no wider than
/// `abs_tol`. Returns `(x_min, f_min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, abs_tol: f64) -> (f64, f64) {
    const RESP: f64 = 2.0 - GOLDEN;
    let mut x1 = a + RESP * (b - a);
    let mut x2 = b - RESP * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > abs_tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + RESP * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - RESP * (b - a);
            f2 = f(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
