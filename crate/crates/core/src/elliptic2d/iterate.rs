use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::grid::{cell_averaged_j, CurrentDensity, Field2D, Grid2D};
use super::poisson::PoissonSolver;
use crate::{Error, Result};

/// Slack allowed in nodewise ordering checks (round-off of one solve).
pub const ORDER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From a supersolution; iterates decrease.
    Descending,
    /// From a subsolution; iterates increase.
    Ascending,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iterations: usize,
    /// Sup-norm change of every iteration.
    pub deltas: Vec<f64>,
    pub monotone_ok: bool,
    pub converged: bool,
    /// Discrete residual of the returned field (no exclusion band).
    pub residual: f64,
    /// Nodes where the floor was active in the last source evaluation.
    pub floor_activations: usize,
}

/// Source of `-Δu = -j̄/√max(u, floor)`; returns the number of clamped nodes.
fn source(u: &Field2D, floor: &Field2D, jbar: &[f64], out: &mut [f64]) -> usize {
    let g = u.grid;
    let mut clamped = 0;
    for i in 1..g.nx {
        for j in 1..g.ny {
            let k = g.idx(i, j);
            if jbar[i] == 0.0 {
                out[k] = 0.0;
                continue;
            }
            let (v, f) = (u.values[k], floor.values[k]);
            if v < f {
                clamped += 1;
            }
            out[k] = -jbar[i] / v.max(f).sqrt();
        }
    }
    clamped
}

/// Max over interior nodes of `|-Δ_h u + j̄/√u|` (nodes with `u ≤ 0` skipped).
pub(crate) fn discrete_residual(u: &Field2D, jbar: &[f64], band: usize) -> f64 {
    let g = u.grid;
    let i0 = g.i_zero();
    let mut worst: f64 = 0.0;
    for i in 1..g.nx {
        if i.abs_diff(i0) < band {
            continue;
        }
        for j in band.max(1)..g.ny {
            let v = u.at(i, j);
            if !(v > 0.0) {
                continue;
            }
            let s = if jbar[i] == 0.0 { 0.0 } else { jbar[i] / v.sqrt() };
            worst = worst.max((u.neg_laplacian(i, j) + s).abs());
        }
    }
    worst
}

/// Picard iteration `uⁿ = P(-j̄/√max(uⁿ⁻¹, floor))` from `start`.
///
/// Stops once the sup-norm change drops below `tol` and the residual has
/// stopped halving. A step against `direction` is a hard error; running out
/// of iterations returns the last iterate with `converged = false`.
pub fn monotone_iterate(
    grid: &Grid2D,
    density: &CurrentDensity,
    start: &Field2D,
    direction: Direction,
    floor: &Field2D,
    tol: f64,
    max_iter: usize,
) -> Result<(Field2D, IterationReport)> {
    let solver = PoissonSolver::new(*grid, 0.0);
    iterate_with(&solver, density, start, direction, floor, tol, max_iter)
}

pub(crate) fn iterate_with(
    solver: &PoissonSolver,
    density: &CurrentDensity,
    start: &Field2D,
    direction: Direction,
    floor: &Field2D,
    tol: f64,
    max_iter: usize,
) -> Result<(Field2D, IterationReport)> {
    let g = *solver.grid();
    let jbar = cell_averaged_j(density, &g);
    let mut boundary = start.clone();
    boundary.impose_problem_boundary();
    // Moving the boundary onto the data keeps a sub (super) a sub (super).
    let mut u = boundary.clone();
    let mut src = vec![0.0; g.len()];
    let mut report = IterationReport {
        iterations: 0,
        deltas: Vec::new(),
        monotone_ok: true,
        converged: false,
        residual: f64::INFINITY,
        floor_activations: 0,
    };
    let mut last_residual = f64::INFINITY;
    for n in 1..=max_iter {
        report.floor_activations = source(&u, floor, &jbar, &mut src);
        let next = solver.solve(&src, &boundary)?;
        let step = match direction {
            Direction::Descending => next.max_excess_over(&u),
            Direction::Ascending => u.max_excess_over(&next),
        };
        if step > ORDER_SLACK {
            report.monotone_ok = false;
            report.iterations = n;
            return Err(Error::Ordering {
                detail: format!("{direction:?} iteration not monotone at step {n}"),
                worst: step,
            });
        }
        let delta = next.sup_distance(&u);
        report.deltas.push(delta);
        u = next;
        report.iterations = n;
        if delta < tol {
            let r = discrete_residual(&u, &jbar, 1);
            if r > 0.5 * last_residual || r == 0.0 {
                report.converged = true;
                report.residual = r;
                break;
            }
            last_residual = r;
        }
    }
    if !report.converged {
        report.residual = discrete_residual(&u, &jbar, 1);
    }
    Ok((u, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetweenReport {
    pub descending: IterationReport,
    pub ascending: IterationReport,
    /// `max |u_max - u_min|`.
    pub gap: f64,
    /// Worst violation of `sub ≤ u_min ≤ u_max ≤ super` (≤ 0 when ordered).
    pub ordering_violation: f64,
}

/// Minimal and maximal discrete solutions between `sub` and `sup`.
pub fn solve_between(
    grid: &Grid2D,
    density: &CurrentDensity,
    sub: &Field2D,
    sup: &Field2D,
    tol: f64,
    max_iter: usize,
) -> Result<(Field2D, Field2D, BetweenReport)> {
    let start_gap = sub.max_excess_over(sup);
    if start_gap > ORDER_SLACK {
        return Err(Error::Ordering { detail: "sub exceeds super".into(), worst: start_gap });
    }
    let solver = PoissonSolver::new(*grid, 0.0);
    let (u_max, descending) = iterate_with(&solver, density, sup, Direction::Descending, sub, tol, max_iter)?;
    let (u_min, ascending) = iterate_with(&solver, density, sub, Direction::Ascending, sub, tol, max_iter)?;
    let ordering_violation = sub
        .max_excess_over(&u_min)
        .max(u_min.max_excess_over(&u_max))
        .max(u_max.max_excess_over(sup));
    if ordering_violation > 1e-9 {
        return Err(Error::Ordering {
            detail: "sub <= u_min <= u_max <= super violated".into(),
            worst: ordering_violation,
        });
    }
    let gap = u_max.sup_distance(&u_min);
    Ok((u_min, u_max, BetweenReport { descending, ascending, gap, ordering_violation }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Grid2D {
        Grid2D::new(1.0, 1.0, 32, 16).unwrap()
    }

    fn flat_floor(g: Grid2D) -> Field2D {
        let mut f = Field2D::from_fn(g, |_, y| y.powf(4.0 / 3.0));
        f.impose_problem_boundary();
        f
    }

    #[test]
    fn zero_density_gives_harmonic_field_at_once() {
        let g = small_grid();
        let d = CurrentDensity::new(0.0, 0.0, 1.0).unwrap();
        let start = Field2D::linear(g);
        let (u, rep) = monotone_iterate(&g, &d, &start, Direction::Descending, &flat_floor(g), 1e-10, 50).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 3, "{}", rep.iterations);
        assert!(rep.residual < 1e-8);
        assert!(u.max_excess_over(&start) <= 1e-12);
    }

    #[test]
    fn descending_from_linear_stays_below() {
        let g = small_grid();
        let d = CurrentDensity::new(0.2, 0.0, 1.0).unwrap();
        let y = Field2D::linear(g);
        let (u, rep) = monotone_iterate(&g, &d, &y, Direction::Descending, &flat_floor(g), 1e-10, 2000).unwrap();
        assert!(rep.converged && rep.monotone_ok);
        assert!(u.max_excess_over(&y) <= 1e-12);
        assert!(rep.deltas.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    }

    #[test]
    fn bracket_closes_for_bounded_current() {
        let g = small_grid();
        let d = CurrentDensity::new(0.2, 0.0, 1.0).unwrap();
        let sub = flat_floor(g);
        let (lo, hi, rep) = solve_between(&g, &d, &sub, &Field2D::linear(g), 1e-10, 4000).unwrap();
        assert!(rep.gap < 1e-8, "{}", rep.gap);
        assert!(lo.max_excess_over(&hi) <= 1e-12);
        assert_eq!(rep.ascending.floor_activations, 0);
    }

    #[test]
    fn non_monotone_start_is_rejected() {
        let g = small_grid();
        let d = CurrentDensity::new(0.2, 0.0, 1.0).unwrap();
        // y^{4/3} is a subsolution; descending from it must fail.
        let sub = flat_floor(g);
        let r = monotone_iterate(&g, &d, &sub, Direction::Descending, &sub, 1e-10, 50);
        assert!(matches!(r, Err(Error::Ordering { .. })));
    }
}
