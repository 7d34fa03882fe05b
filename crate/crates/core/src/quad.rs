//! Adaptive Gauss-Kronrod quadrature.
//!
//! The integrands in this crate are made smooth by substitution before they
//! reach this routine, so a plain globally adaptive G7/K15 rule is enough.

use alloc::vec::Vec;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    Estimate {
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    const MAX_PANELS: usize = 4000;
    let first = kronrod(&mut f, a, b);
    let mut panels: Vec<(f64, f64, Estimate)> = Vec::with_capacity(64);
    panels.push((a, b, first));
    loop {
        let (value, error) = panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.2.value, e + p.2.error));
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature { estimate: value, error });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _) = panels[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Panel cannot be split further in floating point.
            return if error <= 1e3 * target {
                Ok(Estimate { value, error })
            } else {
                Err(Error::Quadrature { estimate: value, error })
            };
        }
        panels[worst] = (lo, mid, kronrod(&mut f, lo, mid));
        panels.push((mid, hi, kronrod(&mut f, mid, hi)));
    }
}

/// Composite Simpson rule with `n` panels (`n` is rounded up to even).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let e = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1e-14, 0.0).unwrap();
        let exact = (256.0 - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((e.value - exact).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let e = integrate(|x| (50.0 * x).sin(), 0.0, core::f64::consts::PI, 1e-13, 0.0).unwrap();
        assert!(e.value.abs() < 1e-12);
    }

    #[test]
    fn simpson_agrees() {
        let s = simpson(|x: f64| x.exp(), 0.0, 1.0, 1000);
        assert!((s - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-12, 0.0).unwrap().value, 0.0);
    }
}
