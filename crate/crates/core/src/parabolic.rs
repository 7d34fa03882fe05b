//! IMEX time stepping for `u_t - Δu + j(x)/√u · χ_{u>0} = 0` with the
//! stationary Dirichlet data of the elliptic problem.
//!
//! Diffusion is implicit (one shifted Poisson solve per step), the singular
//! absorption explicit with the source clamped by a positive floor. Both
//! halves are monotone under [`stable_dt`], so ordered data stay ordered.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::elliptic2d::{cell_averaged_j, CurrentDensity, Field2D, Grid2D, PoissonSolver};
use crate::{Error, Result};

/// The two step bounds of the scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtBounds {
    /// `min(hx², hy²)/4`.
    pub diffusion: f64,
    /// `(min interior floor)^{3/2} / (2 max j̄)`; keeps the explicit source monotone.
    pub source: f64,
}

impl DtBounds {
    pub fn safe(&self) -> f64 {
        self.diffusion.min(self.source)
    }
}

pub fn stable_dt(grid: &Grid2D, density: &CurrentDensity, floor: &Field2D) -> DtBounds {
    let h = grid.hx().min(grid.hy());
    let jmax = cell_averaged_j(density, grid).into_iter().fold(0.0, f64::max);
    let source = if jmax == 0.0 {
        f64::INFINITY
    } else {
        floor.min_interior().max(0.0).powf(1.5) / (2.0 * jmax)
    };
    DtBounds { diffusion: 0.25 * h * h, source }
}

/// Reusable stepper: the factorized `(1/dt - Δ_h)` and the column currents.
#[derive(Debug, Clone)]
pub struct Stepper {
    solver: PoissonSolver,
    jbar: Vec<f64>,
    dt: f64,
    floor: Field2D,
    rhs: Vec<f64>,
}

impl Stepper {
    pub fn new(dt: f64, density: &CurrentDensity, floor: &Field2D) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Domain { name: "dt", value: dt, expected: "(0, inf)" });
        }
        let g = floor.grid;
        Ok(Stepper {
            solver: PoissonSolver::new(g, 1.0 / dt),
            jbar: cell_averaged_j(density, &g),
            dt,
            floor: floor.clone(),
            rhs: vec![0.0; g.len()],
        })
    }

    /// One step; returns the new field and the number of nodes clamped at 0.
    pub fn step(&mut self, u: &Field2D) -> Result<(Field2D, usize)> {
        let g = u.grid;
        let inv = 1.0 / self.dt;
        for i in 1..g.nx {
            for j in 1..g.ny {
                let k = g.idx(i, j);
                let v = u.values[k];
                let s = if v > 0.0 && self.jbar[i] > 0.0 {
                    self.jbar[i] / v.max(self.floor.values[k]).sqrt()
                } else {
                    0.0
                };
                self.rhs[k] = v * inv - s;
            }
        }
        let mut boundary = u.clone();
        boundary.impose_problem_boundary();
        let mut next = self.solver.solve(&self.rhs, &boundary)?;
        let mut clamped = 0;
        for v in next.values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                clamped += 1;
            }
        }
        Ok((next, clamped))
    }
}

/// Single IMEX step `(I - dt Δ_h)uⁿ⁺¹ = uⁿ - dt j̄/√max(uⁿ, floor) χ_{uⁿ>0}`.
pub fn step_imex(field: &Field2D, dt: f64, density: &CurrentDensity, floor: &Field2D) -> Result<Field2D> {
    Ok(Stepper::new(dt, density, floor)?.step(field)?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Sup-norm distance to the reference field at every stamp (empty without one).
    pub distance: Vec<f64>,
    /// Decimated snapshots `(t, u(t))`, first and last included.
    pub snapshots: Vec<(f64, Field2D)>,
    pub steps: usize,
    pub clamped_nodes: usize,
    pub dt: f64,
    pub bounds: DtBounds,
}

fn check_dt(dt: f64, bounds: &DtBounds) -> Result<()> {
    let safe = bounds.safe();
    if !(dt > 0.0) || dt > safe * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, safe });
    }
    Ok(())
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain { name: "T", value: t_end, expected: "(0, inf)" });
    }
    Ok(((t_end / dt) - 1e-9).ceil().max(1.0) as usize)
}

/// Evolves `u0` to `T` with `stamps` equally spaced records (plus `t = 0`)
/// and at most `snapshots` stored fields.
pub fn evolve(
    u0: &Field2D,
    t_end: f64,
    dt: f64,
    density: &CurrentDensity,
    floor: &Field2D,
    reference: Option<&Field2D>,
    stamps: usize,
    snapshots: usize,
) -> Result<Trajectory> {
    let bounds = stable_dt(&u0.grid, density, floor);
    check_dt(dt, &bounds)?;
    let n = step_count(t_end, dt)?;
    let every = (n / stamps.max(1)).max(1);
    let snap_every = (n / snapshots.max(1)).max(1);
    let mut stepper = Stepper::new(dt, density, floor)?;
    let mut u = u0.clone();
    u.impose_problem_boundary();
    let mut tr = Trajectory {
        times: vec![0.0],
        distance: reference.map(|r| vec![u.sup_distance(r)]).unwrap_or_default(),
        snapshots: vec![(0.0, u.clone())],
        steps: n,
        clamped_nodes: 0,
        dt,
        bounds,
    };
    for k in 1..=n {
        let (next, clamped) = stepper.step(&u)?;
        tr.clamped_nodes += clamped;
        u = next;
        let t = k as f64 * dt;
        if k % every == 0 || k == n {
            tr.times.push(t);
            if let Some(r) = reference {
                tr.distance.push(u.sup_distance(r));
            }
        }
        if k % snap_every == 0 || k == n {
            if tr.snapshots.last().map(|s| s.0) != Some(t) {
                tr.snapshots.push((t, u.clone()));
            }
        }
    }
    Ok(tr)
}

/// `‖δ^{-γ} w₊‖` in the trapezoidal discrete `L²` over interior nodes.
pub fn weighted_positive_norm(w: &Field2D, gamma: f64) -> f64 {
    let g = w.grid;
    let mut s = 0.0;
    for i in 1..g.nx {
        for j in 1..g.ny {
            let v = w.at(i, j).max(0.0);
            if v > 0.0 {
                let d = g.distance_to_boundary(g.x(i), g.y(j));
                let q = v / d.powf(gamma);
                s += q * q;
            }
        }
    }
    (s * g.hx() * g.hy()).sqrt()
}

fn difference(u: &Field2D, v: &Field2D) -> Field2D {
    Field2D { grid: u.grid, values: u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect() }
}

/// Largest `u - v` accepted as rounding. Once both trajectories have reached
/// the same steady state they agree to a few ulps, in either order.
pub const ORDER_ROUNDOFF: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub times: Vec<f64>,
    /// `‖δ^{-γ}(u - v)₊‖`; zero up to rounding when the comparison principle holds.
    pub positive_part: Vec<f64>,
    /// `‖δ^{-γ}(v - u)₊‖`, the gap that actually decays.
    pub reverse_part: Vec<f64>,
    /// `γ = min(3ν/2, 1)`.
    pub gamma: f64,
    /// `(2γ + 1)/4`.
    pub rate: f64,
    pub t_min: f64,
    /// Smallest `C` with `reverse(t) ≤ C t^{-rate} reverse(0)` on `[t_min, T]`.
    pub c: f64,
    pub bounded: bool,
    /// Largest `u - v` seen at any step (≤ 0 when ordered).
    pub worst_order: f64,
    /// Steps with `u > v` anywhere, round-off included.
    pub roundoff_crossings: usize,
    pub steps: usize,
    pub dt: f64,
}

/// Evolves ordered data `u0 ≤ v0` side by side, checks `u ≤ v` after every
/// step and measures the weighted decay of the gap.
#[allow(clippy::too_many_arguments)]
pub fn comparison_decay(
    u0: &Field2D,
    v0: &Field2D,
    nu: f64,
    t_end: f64,
    dt: f64,
    density: &CurrentDensity,
    floor: &Field2D,
    t_min: f64,
    stamps: usize,
) -> Result<DecayReport> {
    if !(nu > 0.0 && nu <= 4.0 / 3.0) {
        return Err(Error::Domain { name: "nu", value: nu, expected: "(0, 4/3]" });
    }
    let start = u0.max_excess_over(v0);
    if start > 0.0 {
        return Err(Error::Ordering { detail: "initial data not ordered".into(), worst: start });
    }
    let bounds = stable_dt(&u0.grid, density, floor);
    check_dt(dt, &bounds)?;
    let n = step_count(t_end, dt)?;
    let every = (n / stamps.max(1)).max(1);
    let gamma = (1.5 * nu).min(1.0);
    let rate = (2.0 * gamma + 1.0) / 4.0;
    let mut stepper = Stepper::new(dt, density, floor)?;
    let (mut u, mut v) = (u0.clone(), v0.clone());
    u.impose_problem_boundary();
    v.impose_problem_boundary();
    let mut rep = DecayReport {
        times: vec![0.0],
        positive_part: vec![weighted_positive_norm(&difference(&u, &v), gamma)],
        reverse_part: vec![weighted_positive_norm(&difference(&v, &u), gamma)],
        gamma,
        rate,
        t_min,
        c: 0.0,
        bounded: false,
        worst_order: u.max_excess_over(&v),
        roundoff_crossings: 0,
        steps: n,
        dt,
    };
    for k in 1..=n {
        u = stepper.step(&u)?.0;
        v = stepper.step(&v)?.0;
        let order = u.max_excess_over(&v);
        rep.worst_order = rep.worst_order.max(order);
        if order > 0.0 {
            rep.roundoff_crossings += 1;
        }
        if order > ORDER_ROUNDOFF {
            return Err(Error::Ordering { detail: alloc::format!("u > v at step {k}"), worst: order });
        }
        if k % every == 0 || k == n {
            rep.times.push(k as f64 * dt);
            rep.positive_part.push(weighted_positive_norm(&difference(&u, &v), gamma));
            rep.reverse_part.push(weighted_positive_norm(&difference(&v, &u), gamma));
        }
    }
    let w0 = rep.reverse_part[0];
    rep.c = if w0 > 0.0 {
        rep.times
            .iter()
            .zip(&rep.reverse_part)
            .filter(|(t, _)| **t >= t_min)
            .map(|(t, w)| w * t.powf(rate) / w0)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    rep.bounded = rep.c.is_finite() && rep.worst_order <= ORDER_ROUNDOFF;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic2d::{poisson_solve, solve_between};

    fn grid() -> Grid2D {
        Grid2D::new(1.0, 1.0, 32, 16).unwrap()
    }

    fn floor(g: Grid2D) -> Field2D {
        let mut f = Field2D::from_fn(g, |_, y| y.powf(4.0 / 3.0));
        f.impose_problem_boundary();
        f
    }

    #[test]
    fn harmonic_field_is_stationary() {
        let g = grid();
        let d = CurrentDensity::new(0.0, 0.0, 1.0).unwrap();
        let mut b = Field2D::from_fn(g, |_, _| 0.0);
        b.impose_problem_boundary();
        let h = poisson_solve(&g, &vec![0.0; g.len()], &b).unwrap();
        let next = step_imex(&h, 1e-3, &d, &floor(g)).unwrap();
        assert!(next.sup_distance(&h) < 1e-12);
    }

    #[test]
    fn one_step_lowers_field_under_current() {
        let g = grid();
        let d = CurrentDensity::new(0.2, 0.25, 1.0).unwrap();
        let y = Field2D::linear(g);
        let dt = stable_dt(&g, &d, &floor(g)).safe();
        let next = step_imex(&y, dt, &d, &floor(g)).unwrap();
        let jbar = cell_averaged_j(&d, &g);
        for i in 1..g.nx {
            for j in 1..g.ny {
                if jbar[i] > 0.0 {
                    assert!(next.at(i, j) < y.at(i, j), "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn oversized_step_is_rejected_with_safe_value() {
        let g = grid();
        let d = CurrentDensity::new(0.2, 0.0, 1.0).unwrap();
        let y = Field2D::linear(g);
        match evolve(&y, 0.1, 1.0, &d, &floor(g), None, 4, 2) {
            Err(Error::StepTooLarge { safe, .. }) => assert!(safe > 0.0 && safe < 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn evolution_from_y_approaches_elliptic_solution() {
        let g = grid();
        let d = CurrentDensity::new(0.2, 0.0, 1.0).unwrap();
        let f = floor(g);
        let (u_min, _, _) = solve_between(&g, &d, &f, &Field2D::linear(g), 1e-12, 4000).unwrap();
        let dt = stable_dt(&g, &d, &f).safe();
        let tr = evolve(&Field2D::linear(g), 1.5, dt, &d, &f, Some(&u_min), 50, 3).unwrap();
        assert!(tr.distance.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        assert!(*tr.distance.last().unwrap() < 1e-3);
        assert_eq!(tr.clamped_nodes, 0);
    }

    #[test]
    fn equal_data_give_zero_series_and_swap_is_rejected() {
        let g = grid();
        let d = CurrentDensity::new(0.2, 0.0, 1.0).unwrap();
        let f = floor(g);
        let dt = stable_dt(&g, &d, &f).safe();
        let y = Field2D::linear(g);
        let rep = comparison_decay(&y, &y, 4.0 / 3.0, 0.05, dt, &d, &f, 0.01, 10).unwrap();
        assert!(rep.positive_part.iter().chain(&rep.reverse_part).all(|&v| v == 0.0));
        assert!(matches!(
            comparison_decay(&y, &f, 4.0 / 3.0, 0.05, dt, &d, &f, 0.01, 10),
            Err(Error::Ordering { .. })
        ));
    }

    #[test]
    fn ordered_pair_stays_ordered_and_gap_decays() {
        let g = grid();
        let d = CurrentDensity::new(0.2, 0.0, 1.0).unwrap();
        let f = floor(g);
        let dt = stable_dt(&g, &d, &f).safe();
        let rep = comparison_decay(&f, &Field2D::linear(g), 4.0 / 3.0, 0.5, dt, &d, &f, 0.1, 20).unwrap();
        assert!(rep.worst_order <= 0.0);
        assert!(rep.bounded && rep.c > 0.0);
        assert_eq!(rep.gamma, 1.0);
        assert!(rep.reverse_part.last().unwrap() < &rep.reverse_part[0]);
    }
}
