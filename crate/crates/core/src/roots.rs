//! Bracketing root finders used by every spectral search in the crate.

use crate::error::{Error, Result};

/// A bracket `[lo, hi]` across which `f` changes sign.
#[derive(Clone, Copy, Debug)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

fn sign_changes(a: f64, b: f64) -> bool {
    (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)
}

/// Scan `steps` equal sub-intervals of `[lo, hi]` from the left and return
/// every sub-interval over which `f` changes sign, stopping after `limit`.
pub fn scan_sign_changes<F>(mut f: F, lo: f64, hi: f64, steps: usize, limit: usize) -> Result<Vec<Bracket>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut out = Vec::new();
    if steps == 0 || limit == 0 {
        return Ok(out);
    }
    let h = (hi - lo) / steps as f64;
    let mut x0 = lo;
    let mut f0 = f(x0)?;
    for i in 1..=steps {
        let x1 = if i == steps { hi } else { lo + h * i as f64 };
        let f1 = f(x1)?;
        if f0 == 0.0 && i == 1 {
            // a root exactly at the left end is not reported; the caller
            // chose an open interval
        } else if sign_changes(f0, f1) {
            out.push(Bracket { lo: x0, hi: x1, f_lo: f0, f_hi: f1 });
            if out.len() >= limit {
                break;
            }
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(out)
}

/// Bisection on a sign-change bracket until the width is below
/// `rel_tol * max(|lo|, |hi|)` (or exact zero is hit).
pub fn bisect<F>(mut f: F, bracket: Bracket, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let Bracket { mut lo, mut hi, mut f_lo, f_hi } = bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !sign_changes(f_lo, f_hi) {
        return Err(Error::Internal(format!("bisect called without a sign change on [{lo}, {hi}]")));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if sign_changes(f_lo, fm) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = fm;
        }
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// First root of `f` on `(0, hi]` when `f` is known to carry a fixed sign
/// on a right-neighbourhood of zero (`sign_near_zero`).
///
/// The uniform scan uses `steps` sub-intervals. If the first grid point
/// already carries the opposite sign, the root sits below the grid spacing
/// and is chased geometrically toward zero before bisecting.
pub fn first_root_from_zero<F>(
    mut f: F,
    hi: f64,
    steps: usize,
    sign_near_zero: f64,
    rel_tol: f64,
    what: &'static str,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let h = hi / steps as f64;
    let f_first = f(h)?;
    if f_first == 0.0 {
        return Ok(h);
    }
    if f_first * sign_near_zero < 0.0 {
        let mut x_hi = h;
        let mut f_hi = f_first;
        let mut x = h;
        for _ in 0..200 {
            x *= 0.5;
            let fx = f(x)?;
            if fx * sign_near_zero > 0.0 {
                let b = Bracket { lo: x, hi: x_hi, f_lo: fx, f_hi };
                return bisect(&mut f, b, rel_tol);
            }
            if fx == 0.0 {
                return Ok(x);
            }
            x_hi = x;
            f_hi = fx;
        }
        return Err(Error::NoBracket { what, lo: 0.0, hi: h });
    }
    let brackets = scan_sign_changes(&mut f, h, hi, steps.saturating_sub(1).max(1), 1)?;
    match brackets.first() {
        Some(b) => bisect(&mut f, *b, rel_tol),
        None => Err(Error::NoBracket { what, lo: 0.0, hi }),
    }
}
