use alloc::vec::Vec;

use crate::elliptic2d::Field2D;

/// Which inequality a kink must satisfy. With `n` pointing from the minus to
/// the plus side, a subsolution needs `∂u₋/∂n ≤ ∂u₊/∂n` and a
/// supersolution the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSample {
    pub x: f64,
    pub y: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    /// Nonnegative when the sample has the required sense.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    pub sense: Sense,
    pub samples: Vec<JumpSample>,
    pub worst_margin: f64,
    pub ok: bool,
}

fn margin(sense: Sense, d_minus: f64, d_plus: f64) -> f64 {
    match sense {
        Sense::Sub => d_plus - d_minus,
        Sense::Super => d_minus - d_plus,
    }
}

fn finish(sense: Sense, samples: Vec<JumpSample>, tol: f64) -> JumpReport {
    let worst_margin = samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    JumpReport { sense, ok: worst_margin >= -tol, samples, worst_margin }
}

/// Normal-derivative jump across the grid column `i` (normal `+x`), using
/// second-order one-sided differences on each side, at rows `1..ny`.
pub fn vertical_jump(field: &Field2D, i: usize, sense: Sense, tol: f64) -> JumpReport {
    let g = field.grid;
    let h = g.hx();
    let samples = if i < 2 || i + 2 > g.nx {
        Vec::new()
    } else {
        (1..g.ny)
            .map(|j| {
                let c = field.at(i, j);
                let d_minus = (3.0 * c - 4.0 * field.at(i - 1, j) + field.at(i - 2, j)) / (2.0 * h);
                let d_plus = (-3.0 * c + 4.0 * field.at(i + 1, j) - field.at(i + 2, j)) / (2.0 * h);
                JumpSample { x: g.x(i), y: g.y(j), d_minus, d_plus, margin: margin(sense, d_minus, d_plus) }
            })
            .collect()
    };
    finish(sense, samples, tol)
}

/// Jump along a curve given by points and unit normals, with each side
/// evaluated from its own closed form at step `step`.
pub fn curve_jump(
    points: &[((f64, f64), (f64, f64))],
    step: f64,
    f_minus: &dyn Fn(f64, f64) -> f64,
    f_plus: &dyn Fn(f64, f64) -> f64,
    sense: Sense,
    tol: f64,
) -> JumpReport {
    let samples = points
        .iter()
        .map(|&((x, y), (nx, ny))| {
            let at = |f: &dyn Fn(f64, f64) -> f64, k: f64| f(x + k * step * nx, y + k * step * ny);
            let d_minus = (3.0 * at(f_minus, 0.0) - 4.0 * at(f_minus, -1.0) + at(f_minus, -2.0)) / (2.0 * step);
            let d_plus = (-3.0 * at(f_plus, 0.0) + 4.0 * at(f_plus, 1.0) - at(f_plus, 2.0)) / (2.0 * step);
            JumpSample { x, y, d_minus, d_plus, margin: margin(sense, d_minus, d_plus) }
        })
        .collect();
    finish(sense, samples, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic2d::Grid2D;

    #[test]
    fn convex_kink_is_sub() {
        let g = Grid2D::new(1.0, 1.0, 32, 16).unwrap();
        let f = Field2D::from_fn(g, |x, y| y * (1.0 + x.abs()));
        let i0 = g.i_zero();
        let sub = vertical_jump(&f, i0, Sense::Sub, 1e-12);
        assert!(sub.ok && sub.worst_margin > 0.0);
        let sup = vertical_jump(&f, i0, Sense::Super, 1e-12);
        assert!(!sup.ok);
        // Smooth fields have no jump.
        let s = Field2D::from_fn(g, |x, y| x * x * y);
        assert!(vertical_jump(&s, i0, Sense::Sub, 1e-12).worst_margin.abs() < 1e-12);
    }

    #[test]
    fn curve_version_matches_closed_form() {
        // u = |x - y| across the diagonal with normal (1,-1)/√2 has jump 2√2.
        let n = (0.5f64.sqrt(), -(0.5f64.sqrt()));
        let pts: Vec<_> = [0.2, 0.5].iter().map(|&t| ((t, t), n)).collect();
        let f = |x: f64, y: f64| (x - y).abs();
        let r = curve_jump(&pts, 1e-3, &f, &f, Sense::Sub, 1e-12);
        assert!(r.samples.iter().all(|s| (s.margin - 8.0f64.sqrt()).abs() < 1e-9));
    }
}
