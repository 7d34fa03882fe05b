//! Derivative-free and safeguarded root finders on monotone functions.


use crate::{Error, Result};

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must have opposite signs.
///
/// Stops when the bracket is shorter than `tol * |mid|` or an exact
/// zero is hit.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol * mid.abs() || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Doubles `hi` (starting from `start > lo`) until `f(hi)` changes sign
/// relative to `f(lo)`. Returns the bracket.
pub fn expand_upward<F: FnMut(f64) -> f64>(mut f: F, lo: f64, start: f64) -> Result<(f64, f64)> {
    let f_lo = f(lo);
    let mut prev = lo;
    let mut hi = start;
    for _ in 0..200 {
        let f_hi = f(hi);
        if f_hi.signum() != f_lo.signum() || f_hi == 0.0 {
            return Ok((prev, hi));
        }
        prev = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::Bracket { lo, hi, f_lo, f_hi: f(prev) })
}

/// Newton iteration for `g(x) = target` with `g` increasing, kept inside the
/// bracket `[lo, hi]` by falling back to bisection.
pub fn safeguarded_newton<G, D>(
    mut g: G,
    mut dg: D,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    tol: f64,
) -> Result<f64>
where
    G: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let mut x = x0.clamp(lo, hi);
    for _ in 0..200 {
        let r = g(x) - target;
        if r == 0.0 {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = dg(x);
        let mut next = x - r / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= tol * next.abs().max(1e-300) || hi - lo <= tol * hi.abs() {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Bracket {
        lo,
        hi,
        f_lo: g(lo) - target,
        f_hi: g(hi) - target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_cube_root() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn expansion_brackets_far_root() {
        let (lo, hi) = expand_upward(|x| x - 1000.0, 0.0, 1.0).unwrap();
        assert!(lo < 1000.0 && hi >= 1000.0);
    }

    #[test]
    fn newton_inverts_exp() {
        let x = safeguarded_newton(|x: f64| x.exp(), |x: f64| x.exp(), 5.0, 0.0, 3.0, 0.1, 1e-15)
            .unwrap();
        assert!((x - 5f64.ln()).abs() < 1e-14);
    }
}
