use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::grid::{cell_averaged_j, CurrentDensity, Field2D, Grid2D};
use super::iterate::{discrete_residual, monotone_iterate, Direction, IterationReport};
use crate::{Error, Result};

/// Max of `|-Δ_h u + j̄/√u|` over interior nodes at least `band` cells away
/// from `y = 0` and from the column `x = 0`.
pub fn residual_norm(field: &Field2D, density: &CurrentDensity, band: usize) -> f64 {
    discrete_residual(field, &cell_averaged_j(density, &field.grid), band)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub rows_used: usize,
    /// Rows skipped because `u ≤ 0` there.
    pub excluded: Vec<usize>,
}

/// Least-squares slope of `log u` against `log y` over rows `1..=m_rows` of
/// column `i`.
pub fn flat_exponent_fit(field: &Field2D, i: usize, m_rows: usize) -> Result<ExponentFit> {
    let g = field.grid;
    if m_rows < 3 || m_rows >= g.ny {
        return Err(Error::Domain { name: "m_rows", value: m_rows as f64, expected: "[3, Ny)" });
    }
    let mut pts = Vec::with_capacity(m_rows);
    let mut excluded = Vec::new();
    for j in 1..=m_rows {
        let u = field.at(i, j);
        if u > 0.0 {
            pts.push((g.y(j).ln(), u.ln()));
        } else {
            excluded.push(j);
        }
    }
    if pts.len() < 2 {
        return Err(Error::Domain {
            name: "positive rows",
            value: pts.len() as f64,
            expected: "at least 2",
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(ExponentFit { exponent: sxy / sxx, rows_used: pts.len(), excluded })
}

/// `(x_i, ∂u/∂y(x_i, 0))` for every column, second-order one-sided.
pub fn edge_flux_profile(field: &Field2D) -> Vec<(f64, f64)> {
    let g = field.grid;
    let hy = g.hy();
    (0..=g.nx)
        .map(|i| {
            let d = (-3.0 * field.at(i, 0) + 4.0 * field.at(i, 1) - field.at(i, 2)) / (2.0 * hy);
            (g.x(i), d)
        })
        .collect()
}

/// Minimum of the edge flux over cathode columns with `x/a ∈ [-hi, -lo]`.
pub fn min_flux_in_window(profile: &[(f64, f64)], a: f64, lo: f64, hi: f64) -> f64 {
    profile
        .iter()
        .filter(|(x, _)| *x >= -hi * a && *x <= -lo * a)
        .map(|p| p.1)
        .fold(f64::INFINITY, f64::min)
}

/// Settings of [`wings_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct WingsSpec {
    pub a: f64,
    pub b: f64,
    /// Intervals of the coarsest grid.
    pub nx: usize,
    pub ny: usize,
    /// Number of grids, each refining the previous by two.
    pub levels: usize,
    pub amplitude: f64,
    pub betas: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Rows used by the exponent fits.
    pub fit_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WingsRow {
    pub beta: f64,
    pub nx: usize,
    pub ny: usize,
    /// Minimum edge flux over the middle half `[-3a/4, -a/4]` of the cathode.
    pub min_cathode_flux: f64,
    pub flux_at_minus_half: f64,
    /// NaN when `u` vanishes there (dead core).
    pub fit_at_minus_half: f64,
    pub fit_at_half: f64,
    /// Fitted slope of `log j̄` against `log(-x)` on the columns next to `x = 0`.
    pub column_j_slope: f64,
    pub report: IterationReport,
}

/// Floor used when no verified subsolution is supplied: `10⁻⁴ y²`, far
/// below every positive solution observed here. A clamped limit shows up as
/// nonzero `floor_activations`.
pub fn weak_floor(grid: Grid2D) -> Field2D {
    Field2D::from_fn(grid, |_, y| 1e-4 * y * y)
}

/// Slope of `log j̄` against `log(-x)` over the eight cathode columns
/// closest to (but not on) `x = 0`.
pub fn column_j_slope(density: &CurrentDensity, grid: &Grid2D) -> f64 {
    let jbar = cell_averaged_j(density, grid);
    let i0 = grid.i_zero();
    let pts: Vec<(f64, f64)> = (i0.saturating_sub(8)..i0)
        .filter(|&i| i > 0 && jbar[i] > 0.0)
        .map(|i| ((-grid.x(i)).ln(), jbar[i].ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// NaN when the column vanishes on the fitted rows (a dead core).
fn fit_or_nan(u: &Field2D, i: usize, rows: usize) -> Result<f64> {
    match flat_exponent_fit(u, i, rows) {
        Ok(f) => Ok(f.exponent),
        Err(Error::Domain { name: "positive rows", .. }) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

/// Solves from `u = y` for each β on every refinement level.
pub fn wings_experiment(spec: &WingsSpec) -> Result<Vec<WingsRow>> {
    if !spec.betas.contains(&0.0) || !spec.betas.iter().any(|&b| b > 0.0 && b < 0.5) {
        return Err(Error::Domain {
            name: "beta_list",
            value: spec.betas.len() as f64,
            expected: "0 and at least one value in (0, 1/2)",
        });
    }
    let mut rows = Vec::new();
    for &beta in &spec.betas {
        let mut grid = Grid2D::new(spec.a, spec.b, spec.nx, spec.ny)?;
        for _ in 0..spec.levels {
            let density = CurrentDensity::new(spec.amplitude, beta, spec.a)?;
            let start = Field2D::linear(grid);
            let (u, report) = monotone_iterate(
                &grid,
                &density,
                &start,
                Direction::Descending,
                &weak_floor(grid),
                spec.tol,
                spec.max_iter,
            )?;
            let flux = edge_flux_profile(&u);
            let im = grid.column_of(-0.5 * spec.a);
            let ip = grid.column_of(0.5 * spec.b);
            rows.push(WingsRow {
                beta,
                nx: grid.nx,
                ny: grid.ny,
                min_cathode_flux: min_flux_in_window(&flux, spec.a, 0.25, 0.75),
                flux_at_minus_half: flux[im].1,
                fit_at_minus_half: fit_or_nan(&u, im, spec.fit_rows)?,
                fit_at_half: fit_or_nan(&u, ip, spec.fit_rows)?,
                column_j_slope: column_j_slope(&density, &grid),
                report,
            });
            grid = grid.refined();
        }
    }
    Ok(rows)
}

/// Smallest `u/δ^ν` over interior nodes and where it occurs.
pub fn nondegeneracy_check(field: &Field2D, nu: f64) -> Result<(f64, (f64, f64))> {
    if !(nu > 0.0 && nu <= 4.0 / 3.0 + 1e-15) {
        return Err(Error::Domain { name: "nu", value: nu, expected: "(0, 4/3]" });
    }
    let g = field.grid;
    let mut best = (f64::INFINITY, (f64::NAN, f64::NAN));
    for i in 1..g.nx {
        for j in 1..g.ny {
            let (x, y) = (g.x(i), g.y(j));
            let r = field.at(i, j) / g.distance_to_boundary(x, y).powf(nu);
            if r < best.0 {
                best = (r, (x, y));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierCheck {
    /// Whether `j̄ ≥ 4 max(1, √2/√(-x))` on every cathode column.
    pub applicable: bool,
    pub holds: bool,
    /// Smallest `bound - u` over the covered nodes.
    pub worst_margin: f64,
    pub nodes_checked: usize,
}

/// `u ≤ max(1, 2^{1/3}(-x₀)^{-1/3}) ((x-x₀)² + y²)^{2/3}` on the half-disc of
/// radius `-x₀` around `(x₀, 0)`.
pub fn barrier_bound_check(field: &Field2D, density: &CurrentDensity, x0: f64) -> Result<BarrierCheck> {
    let g = field.grid;
    if !(x0 < 0.0 && x0 > -g.a) {
        return Err(Error::Domain { name: "x0", value: x0, expected: "(-a, 0)" });
    }
    let jbar = cell_averaged_j(density, &g);
    let applicable = (1..g.i_zero()).all(|i| {
        let x = g.x(i);
        jbar[i] >= 4.0 * (2.0 / (-x)).sqrt().max(1.0)
    });
    let mut out = BarrierCheck { applicable, holds: true, worst_margin: f64::INFINITY, nodes_checked: 0 };
    if !applicable {
        return Ok(out);
    }
    let c = (2f64.cbrt() / (-x0).cbrt()).max(1.0);
    for i in 0..=g.nx {
        for j in 0..=g.ny {
            let (x, y) = (g.x(i), g.y(j));
            let rho2 = (x - x0) * (x - x0) + y * y;
            if rho2 >= x0 * x0 {
                continue;
            }
            let margin = c * rho2.powf(2.0 / 3.0) - field.at(i, j);
            out.nodes_checked += 1;
            out.worst_margin = out.worst_margin.min(margin);
        }
    }
    out.holds = out.worst_margin >= -1e-12;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::J_FLAT;

    fn grid() -> Grid2D {
        Grid2D::new(1.0, 1.0, 64, 32).unwrap()
    }

    #[test]
    fn exponent_of_synthetic_fields() {
        let g = grid();
        let f = Field2D::from_fn(g, |_, y| y.powf(4.0 / 3.0));
        let fit = flat_exponent_fit(&f, 10, 8).unwrap();
        assert!((fit.exponent - 4.0 / 3.0).abs() < 1e-6);
        let z = Field2D::from_fn(g, |_, y| if y < 0.05 { 0.0 } else { y });
        let fit = flat_exponent_fit(&z, 10, 8).unwrap();
        assert_eq!(fit.excluded, [1]);
    }

    #[test]
    fn flux_of_synthetic_fields() {
        let g = grid();
        let lin = edge_flux_profile(&Field2D::from_fn(g, |_, y| y));
        assert!(lin.iter().all(|p| (p.1 - 1.0).abs() < 1e-12));
        let coarse = edge_flux_profile(&Field2D::from_fn(g, |_, y| y.powf(4.0 / 3.0)))[5].1;
        let fine = edge_flux_profile(&Field2D::from_fn(g.refined(), |_, y| y.powf(4.0 / 3.0)))[5].1;
        assert!(fine < coarse && fine > 0.0);
        // One-sided difference of y^{4/3} at h is c h^{1/3}.
        assert!((coarse / fine - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn flat_profile_residual_is_truncation_sized() {
        let g = grid();
        let f = Field2D::from_fn(g, |_, y| y.powf(4.0 / 3.0));
        let mut d = CurrentDensity::new(J_FLAT, 0.0, 1.0).unwrap();
        d.column_override = Some(alloc::vec![J_FLAT; g.nx + 1]);
        let coarse = residual_norm(&f, &d, 8);
        let fg = g.refined();
        d.column_override = Some(alloc::vec![J_FLAT; fg.nx + 1]);
        let fine = residual_norm(&Field2D::from_fn(fg, |_, y| y.powf(4.0 / 3.0)), &d, 16);
        // Same physical band y ≥ 1/4; second order in h.
        assert!(coarse < 1e-2 && fine < 0.3 * coarse, "{coarse} {fine}");
    }

    #[test]
    fn nondegeneracy_of_linear_and_zero() {
        let g = grid();
        let (r, _) = nondegeneracy_check(&Field2D::from_fn(g, |_, y| y), 1.0).unwrap();
        assert!(r >= 1.0 - 1e-12);
        let (r, _) = nondegeneracy_check(&Field2D::from_fn(g, |_, _| 0.0), 4.0 / 3.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn barrier_applicability() {
        let g = grid();
        let f = Field2D::linear(g);
        let small = CurrentDensity::new(0.1, 0.25, 1.0).unwrap();
        assert!(!barrier_bound_check(&f, &small, -0.5).unwrap().applicable);
        let mut big = CurrentDensity::new(0.0, 0.0, 1.0).unwrap();
        big.column_override = Some(
            (0..=g.nx)
                .map(|i| {
                    let x = g.x(i);
                    if x < 0.0 { 8.0 * (2.0 / (-x)).sqrt().max(1.0) } else { 0.0 }
                })
                .collect(),
        );
        let zero = Field2D::from_fn(g, |_, _| 0.0);
        let c = barrier_bound_check(&zero, &big, -0.5).unwrap();
        assert!(c.applicable && c.holds && c.nodes_checked > 0);
        assert!(c.worst_margin.abs() < 1e-15);
    }

    #[test]
    fn column_slope_tracks_beta() {
        let g = grid();
        let s1 = column_j_slope(&CurrentDensity::new(1.0, 0.25, 1.0).unwrap(), &g);
        let s2 = column_j_slope(&CurrentDensity::new(1.0, 0.4, 1.0).unwrap(), &g);
        assert!(s2 < s1 && s1 < 0.0);
    }
}
