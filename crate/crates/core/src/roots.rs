//! Bracketed scalar root finding (Illinois false position with a bisection
//! safeguard). Used for the ξ equation and for shooting refinements.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    /// `|fx| <= f_tol` was reached (as opposed to the bracket collapsing).
    pub converged: bool,
}

/// Finds a zero of `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of opposite
/// sign. Stops when `|f| <= f_tol`, when the bracket can no longer shrink in
/// floating point, or after `max_iter` evaluations; the best point seen is
/// returned in the last two cases.
pub fn illinois<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
        std::mem::swap(&mut flo, &mut fhi);
    }
    if flo.abs() <= f_tol || fhi.abs() <= f_tol {
        let (x, fx) = if flo.abs() <= fhi.abs() { (lo, flo) } else { (hi, fhi) };
        return Ok(Root { x, fx, evaluations: 0, converged: true });
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "f({lo}) = {flo} and f({hi}) = {fhi} do not straddle zero"
        )));
    }
    let lo_sign = flo.signum();
    let mut best = if flo.abs() <= fhi.abs() { (lo, flo) } else { (hi, fhi) };
    // Illinois bookkeeping: -1 if lo was replaced last, +1 if hi was.
    let mut last = 0i8;
    let mut width = hi - lo;
    let mut slow_steps = 0;

    for k in 1..=max_iter {
        let mut x = if slow_steps >= 3 {
            slow_steps = 0;
            0.5 * (lo + hi)
        } else {
            (lo * fhi - hi * flo) / (fhi - flo)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
            if !(x > lo && x < hi) {
                return Ok(Root { x: best.0, fx: best.1, evaluations: k - 1, converged: false });
            }
        }
        let fx = f(x)?;
        if fx.abs() <= best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= f_tol {
            return Ok(Root { x, fx, evaluations: k, converged: true });
        }
        if fx.signum() == lo_sign {
            lo = x;
            flo = fx;
            if last == -1 {
                fhi *= 0.5;
            }
            last = -1;
        } else {
            hi = x;
            fhi = fx;
            if last == 1 {
                flo *= 0.5;
            }
            last = 1;
        }
        let new_width = hi - lo;
        if new_width > 0.5 * width {
            slow_steps += 1;
        } else {
            slow_steps = 0;
            width = new_width;
        }
    }
    Ok(Root { x: best.0, fx: best.1, evaluations: max_iter, converged: false })
}
