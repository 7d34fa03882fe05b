//! Dormand-Prince 5(4) with step-size control for small first-order systems.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-11, atol: 1e-13 }
    }
}

/// Integrates `y' = f(t, y)` from `t0` through each point of `stops` (which
/// must be monotone in the direction of integration) and returns the state at
/// every stop. `admissible` is checked after each accepted step; a `false`
/// aborts with an integration error.
pub fn integrate<const N: usize, F, G>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    stops: &[f64],
    tol: Tolerance,
    mut admissible: G,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]) -> bool,
{
    let mut out = Vec::with_capacity(stops.len());
    let mut t = t0;
    let mut y = y0;
    let span = stops.last().map_or(0.0, |&s| (s - t0).abs());
    let mut h = (span * 1e-3).max(1e-12);
    for &target in stops {
        let dir = if target >= t { 1.0 } else { -1.0 };
        while (target - t).abs() > 1e-15 * target.abs().max(1.0) {
            let remaining = (target - t).abs();
            let hs = h.min(remaining);
            let (y_new, err) = step(&mut f, t, &y, dir * hs, tol);
            if err <= 1.0 {
                t = if hs == remaining { target } else { t + dir * hs };
                y = y_new;
                if !admissible(t, &y) {
                    return Err(Error::Integration {
                        at: t,
                        detail: format!("state left the admissible set: {:?}", &y[..]),
                    });
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = hs * factor;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration {
                    at: t,
                    detail: format!("step size underflow ({h:e})"),
                });
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], h: f64, tol: Tolerance) -> ([f64; N], f64)
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, y);
    for s in 1..7 {
        let mut ys = *y;
        for (i, v) in ys.iter_mut().enumerate() {
            for r in 0..s {
                *v += h * A[s][r] * k[r][i];
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err: f64 = 0.0;
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
        let e = (h * (d5 - d4)) / scale;
        err = err.max(e.abs());
    }
    if !err.is_finite() {
        err = f64::INFINITY;
    }
    (y5, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let stops = [core::f64::consts::PI, 2.0 * core::f64::consts::PI];
        let ys = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            &stops,
            Tolerance::default(),
            |_, _| true,
        )
        .unwrap();
        assert!((ys[0][0] + 1.0).abs() < 1e-9);
        assert!((ys[1][0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        let ys = integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], &[0.0], Tolerance::default(), |_, _| true)
            .unwrap();
        assert!((ys[0][0] - (-1f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn admissibility_violation_is_reported() {
        let r = integrate(|_, _: &[f64; 1]| [-1.0], 0.0, [0.5], &[1.0], Tolerance::default(), |_, y| {
            y[0] > 0.0
        });
        assert!(matches!(r, Err(Error::Integration { .. })));
    }
}
