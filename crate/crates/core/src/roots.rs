//! Bracketed scalar root finding.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("endpoints do not bracket a sign change")]
    NotBracketed,
    #[error("no convergence within {0} iterations")]
    MaxIterations(usize),
}

/// Brent's method on [a, b]. Stops when the bracket is narrower than
/// `xtol` or an exact zero is hit.
pub fn brent<T, F>(mut f: F, a: T, b: T, xtol: T, max_iter: usize) -> Result<T, RootError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let two = T::two();
    let three = T::lit(3.0);

    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
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
        let tol = two * T::epsilon() * b.abs() + T::half() * xtol;
        let m = T::half() * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (three * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        fb = f(b);
    }
    Err(RootError::MaxIterations(max_iter))
}

/// Plain bisection, kept as the reference method for monotone problems.
pub fn bisect<T, F>(mut f: F, a: T, b: T, xtol: T, max_iter: usize) -> Result<T, RootError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NotBracketed);
    }
    for _ in 0..max_iter {
        let mid = T::half() * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(RootError::MaxIterations(max_iter))
}

/// Scans [from, to] in steps of `step` and returns the first sub-interval
/// whose endpoints change sign (or the degenerate interval of an exact zero).
pub fn first_sign_change<T, F>(mut f: F, from: T, to: T, step: T) -> Option<(T, T)>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let mut a = from;
    let mut fa = f(a);
    if fa == T::zero() {
        return Some((a, a));
    }
    while a < to {
        let b = (a + step).min(to);
        let fb = f(b);
        if fb == T::zero() || fb.signum() != fa.signum() {
            return Some((a, b));
        }
        a = b;
        fa = fb;
    }
    None
}
