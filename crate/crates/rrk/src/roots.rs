//! Scalar root finding on a bracketing interval.

/// Outcome of a bracketed scalar solve.
#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: f64,
    pub iterations: usize,
}

/// Brent's method on a bracket `[a, b]` with `f(a) * f(b) <= 0`.
///
/// Combines inverse quadratic interpolation, the secant step, and bisection
/// (Brent 1973); converges to `2 eps |x| + tol` in the abscissa.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> RootResult {
    let eps = f64::EPSILON;
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    debug_assert!(fa * fb <= 0.0, "root must be bracketed");
    if fa == 0.0 {
        return RootResult { root: a, iterations: 0 };
    }
    if fb == 0.0 {
        return RootResult { root: b, iterations: 0 };
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 0..max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * eps * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return RootResult { root: b, iterations: iter };
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // interpolation step: secant when only two points are distinct,
            // inverse quadratic otherwise
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += if xm > 0.0 { tol1 } else { -tol1 };
        }
        fb = f(b);
    }
    RootResult { root: b, iterations: max_iter }
}

/// Plain bisection; the reference oracle for [`brent`].
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> RootResult {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    debug_assert!(fa * f(b) <= 0.0, "root must be bracketed");
    if fa == 0.0 {
        return RootResult { root: a, iterations: 0 };
    }
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return RootResult { root: m, iterations };
        }
        if (fa > 0.0) == (fm > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if (b - a).abs() <= tol {
            break;
        }
    }
    RootResult {
        root: 0.5 * (a + b),
        iterations,
    }
}
