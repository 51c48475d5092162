//! Scalar root finding: bracketed bisection and plain fixed-point iteration.

use crate::{Error, Result};

/// Outcome of a scalar solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    /// Approximate root.
    pub x: f64,
    /// Residual (bisection) or last update size (fixed point) at `x`.
    pub residual: f64,
    /// Iterations performed.
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` until `|f(x)| <= ftol` and the bracket is narrower than `xtol`.
///
/// The endpoints must give residuals of opposite sign (or one of them zero).
pub fn bisect<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot {
            lo,
            hi,
            r_lo: f_lo,
            r_hi: f_hi,
        });
    }
    let mut best = if f_lo.abs() < f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.abs() <= best.1.abs() {
            best = (mid, f_mid);
        }
        if f_mid == 0.0 || (f_mid.abs() <= ftol && (hi - lo) <= xtol) || mid == lo || mid == hi {
            return Ok(Root {
                x: best.0,
                residual: best.1,
                iterations: it,
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: best.1,
    })
}

/// Iterates `x <- g(x)` until successive iterates differ by at most `tol`.
pub fn fixed_point<G>(mut g: G, x0: f64, tol: f64, max_iter: usize) -> Result<Root>
where
    G: FnMut(f64) -> f64,
{
    let mut x = x0;
    for it in 1..=max_iter {
        let next = g(x);
        if !next.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: f64::NAN,
            });
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol {
            return Ok(Root {
                x,
                residual: step,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: (g(x) - x).abs(),
    })
}

/// Grows `hi` geometrically from `start` until `f(hi)` differs in sign from `f(lo)`.
///
/// Returns the bracket `(lo, hi)` or [`Error::NoRoot`] once `hi` exceeds `limit`.
pub fn expand_bracket<F>(
    mut f: F,
    lo: f64,
    start: f64,
    factor: f64,
    limit: f64,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    let mut hi = start.max(lo * factor);
    loop {
        let f_hi = f(hi);
        if f_hi.is_finite() && (f_hi == 0.0 || f_hi.signum() != f_lo.signum()) {
            return Ok((lo, hi));
        }
        if hi >= limit {
            return Err(Error::NoRoot {
                lo,
                hi,
                r_lo: f_lo,
                r_hi: f_hi,
            });
        }
        hi = (hi * factor).min(limit);
    }
}
