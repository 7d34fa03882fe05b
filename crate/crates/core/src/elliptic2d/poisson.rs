//! Direct solver for the five-point problem `σu - Δ_h u = f` with Dirichlet data.
//!
//! The x-direction is diagonalized by the orthonormal sine basis
//! `S_{ik} = √(2/Nx) sin(πik/Nx)`, which leaves one tridiagonal system in y
//! per mode. The transform is applied as a dense product, so the cost is
//! `O(Nx² Ny)` and the reduction order is fixed.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::grid::{Field2D, Grid2D};
use crate::{Error, Result};

/// Relative algebraic residual accepted from a solve.
pub const SOLVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PoissonSolver {
    grid: Grid2D,
    sigma: f64,
    /// `(Nx-1)²` sine matrix, row-major and symmetric.
    sine: Vec<f64>,
    /// Eigenvalues of `-D_xx`.
    mu: Vec<f64>,
}

impl PoissonSolver {
    /// Solver for `σu - Δ_h u = f`; `σ = 0` is the Poisson problem.
    pub fn new(grid: Grid2D, sigma: f64) -> Self {
        let m = grid.nx - 1;
        let n = grid.nx as f64;
        let scale = (2.0 / n).sqrt();
        let mut sine = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                // Reduce the argument first so the matrix is exactly symmetric.
                let p = ((i + 1) * (k + 1)) % (2 * grid.nx);
                sine[i * m + k] = scale * (PI * p as f64 / n).sin();
            }
        }
        let hx = grid.hx();
        let mu = (1..=m)
            .map(|k| {
                let s = (0.5 * PI * k as f64 / n).sin();
                4.0 * s * s / (hx * hx)
            })
            .collect();
        PoissonSolver { grid, sigma, sine, mu }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Solves `σu - Δ_h u = f` at interior nodes; boundary values come from
    /// `boundary`, and `f` is indexed like [`Field2D::values`].
    pub fn solve(&self, f: &[f64], boundary: &Field2D) -> Result<Field2D> {
        let g = self.grid;
        let (mx, my) = (g.nx - 1, g.ny - 1);
        let (hx2, hy2) = (g.hx() * g.hx(), g.hy() * g.hy());
        // Right-hand side with boundary contributions, interior block (mx × my).
        let mut rhs = vec![0.0; mx * my];
        for i in 1..=mx {
            for j in 1..=my {
                let mut v = f[g.idx(i, j)];
                if i == 1 {
                    v += boundary.at(0, j) / hx2;
                }
                if i == mx {
                    v += boundary.at(g.nx, j) / hx2;
                }
                if j == 1 {
                    v += boundary.at(i, 0) / hy2;
                }
                if j == my {
                    v += boundary.at(i, g.ny) / hy2;
                }
                rhs[(i - 1) * my + (j - 1)] = v;
            }
        }
        let mut hat = self.transform(&rhs, my);
        let off = -1.0 / hy2;
        let mut cp = vec![0.0; my];
        for k in 0..mx {
            let d = self.sigma + self.mu[k] + 2.0 / hy2;
            let row = &mut hat[k * my..(k + 1) * my];
            // Thomas algorithm; the system is strictly diagonally dominant.
            let mut denom = d;
            cp[0] = off / denom;
            row[0] /= denom;
            for j in 1..my {
                denom = d - off * cp[j - 1];
                cp[j] = off / denom;
                row[j] = (row[j] - off * row[j - 1]) / denom;
            }
            for j in (0..my - 1).rev() {
                row[j] -= cp[j] * row[j + 1];
            }
        }
        let sol = self.transform(&hat, my);
        let mut out = boundary.clone();
        for i in 1..=mx {
            for j in 1..=my {
                out.set(i, j, sol[(i - 1) * my + (j - 1)]);
            }
        }
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 1..=mx {
            for j in 1..=my {
                let r = self.sigma * out.at(i, j) + out.neg_laplacian(i, j) - f[g.idx(i, j)];
                worst = worst.max(r.abs());
            }
        }
        if worst > SOLVE_TOL * scale {
            return Err(Error::NonConvergence { iterations: 1, residual: worst / scale });
        }
        Ok(out)
    }

    /// `S · v` for a block of `mx` rows of length `my`.
    fn transform(&self, v: &[f64], my: usize) -> Vec<f64> {
        let m = self.grid.nx - 1;
        let mut out = vec![0.0; m * my];
        for k in 0..m {
            let dst = &mut out[k * my..(k + 1) * my];
            for i in 0..m {
                let s = self.sine[k * m + i];
                let src = &v[i * my..(i + 1) * my];
                for (d, x) in dst.iter_mut().zip(src) {
                    *d += s * x;
                }
            }
        }
        out
    }
}

/// `-Δ_h u = source` with the boundary values of `dirichlet`.
pub fn poisson_solve(grid: &Grid2D, source: &[f64], dirichlet: &Field2D) -> Result<Field2D> {
    PoissonSolver::new(*grid, 0.0).solve(source, dirichlet)
}
