use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Uniform grid on `(-a, b) × (0, 1)` with `x = 0` on a grid line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub a: f64,
    pub b: f64,
    /// Number of intervals in x; nodes are `i = 0..=nx`.
    pub nx: usize,
    /// Number of intervals in y; nodes are `j = 0..=ny`.
    pub ny: usize,
}

impl Grid2D {
    pub fn new(a: f64, b: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain { name: "a", value: a, expected: "(0, inf)" });
        }
        if !(b > 0.0) {
            return Err(Error::Domain { name: "b", value: b, expected: "(0, inf)" });
        }
        if nx < 8 || ny < 8 {
            return Err(Error::Domain {
                name: "Nx/Ny",
                value: nx.min(ny) as f64,
                expected: "at least 8 intervals",
            });
        }
        let g = Grid2D { a, b, nx, ny };
        let k = a / g.hx();
        if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
            return Err(Error::Domain {
                name: "Nx",
                value: nx as f64,
                expected: "a value putting x = 0 on a grid line",
            });
        }
        Ok(g)
    }

    /// Grid from node counts (`257 × 129` means 256 × 128 intervals).
    pub fn from_nodes(a: f64, b: f64, nodes_x: usize, nodes_y: usize) -> Result<Self> {
        Grid2D::new(a, b, nodes_x.saturating_sub(1), nodes_y.saturating_sub(1))
    }

    pub fn hx(&self) -> f64 {
        (self.a + self.b) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx {
            self.b
        } else {
            -self.a + i as f64 * self.hx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny {
            1.0
        } else {
            j as f64 * self.hy()
        }
    }

    /// Column index of `x = 0`.
    pub fn i_zero(&self) -> usize {
        (self.a / self.hx()).round() as usize
    }

    /// Column nearest to `x`.
    pub fn column_of(&self, x: f64) -> usize {
        (((x + self.a) / self.hx()).round().max(0.0) as usize).min(self.nx)
    }

    pub fn len(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx || j == self.ny
    }

    /// The grid with both spacings halved.
    pub fn refined(&self) -> Grid2D {
        Grid2D { nx: 2 * self.nx, ny: 2 * self.ny, ..*self }
    }

    /// Exact distance to the boundary of the rectangle.
    pub fn distance_to_boundary(&self, x: f64, y: f64) -> f64 {
        (x + self.a).min(self.b - x).min(y).min(1.0 - y)
    }
}

/// Problem data: `u(x,0) = 0`, `u(x,1) = 1`, `u(-a,y) = y^{4/3}`, `u(b,y) = y`.
pub fn boundary_value(grid: &Grid2D, i: usize, j: usize) -> f64 {
    let y = grid.y(j);
    if j == 0 {
        0.0
    } else if j == grid.ny {
        1.0
    } else if i == 0 {
        y.powf(4.0 / 3.0)
    } else {
        y
    }
}

/// Grid-sampled scalar field; all four sides are Dirichlet nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn from_fn<F: FnMut(f64, f64) -> f64>(grid: Grid2D, mut f: F) -> Self {
        let mut values = vec![0.0; grid.len()];
        for i in 0..=grid.nx {
            for j in 0..=grid.ny {
                values[grid.idx(i, j)] = f(grid.x(i), grid.y(j));
            }
        }
        Field2D { grid, values }
    }

    /// `u = y`, the supersolution that every run starts from.
    pub fn linear(grid: Grid2D) -> Self {
        let mut f = Field2D::from_fn(grid, |_, y| y);
        f.impose_problem_boundary();
        f
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    /// Overwrites the four sides with the data of the problem.
    pub fn impose_problem_boundary(&mut self) {
        let g = self.grid;
        for i in 0..=g.nx {
            for j in 0..=g.ny {
                if g.is_boundary(i, j) {
                    self.set(i, j, boundary_value(&g, i, j));
                }
            }
        }
    }

    pub fn column(&self, i: usize) -> &[f64] {
        let k = self.grid.idx(i, 0);
        &self.values[k..k + self.grid.ny + 1]
    }

    /// `max |self - other|` over all nodes.
    pub fn sup_distance(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `self - other` (positive when `self` exceeds `other` somewhere).
    pub fn max_excess_over(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `-Δ_h u` at an interior node.
    pub fn neg_laplacian(&self, i: usize, j: usize) -> f64 {
        let (hx, hy) = (self.grid.hx(), self.grid.hy());
        let c = self.at(i, j);
        (2.0 * c - self.at(i - 1, j) - self.at(i + 1, j)) / (hx * hx)
            + (2.0 * c - self.at(i, j - 1) - self.at(i, j + 1)) / (hy * hy)
    }

    pub fn min_interior(&self) -> f64 {
        let g = self.grid;
        let mut m = f64::INFINITY;
        for i in 1..g.nx {
            for j in 1..g.ny {
                m = m.min(self.at(i, j));
            }
        }
        m
    }
}

/// `j(x) = A(-x)^{-β}` on `(-a, 0)`, zero on `(0, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentDensity {
    pub amplitude: f64,
    pub beta: f64,
    pub a: f64,
    /// Per-column values replacing the cell averages.
    pub column_override: Option<Vec<f64>>,
}

impl CurrentDensity {
    pub fn new(amplitude: f64, beta: f64, a: f64) -> Result<Self> {
        if !(amplitude >= 0.0) {
            return Err(Error::Domain { name: "A", value: amplitude, expected: "[0, inf)" });
        }
        if !(beta >= 0.0 && beta < 1.0) {
            return Err(Error::Domain { name: "beta", value: beta, expected: "[0, 1)" });
        }
        Ok(CurrentDensity { amplitude, beta, a, column_override: None })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 && x > -self.a {
            self.amplitude * (-x).powf(-self.beta)
        } else {
            0.0
        }
    }

    /// `∫ j` over `[lo, hi]`.
    fn integral(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(-self.a);
        let hi = hi.min(0.0);
        if hi <= lo {
            return 0.0;
        }
        let p = 1.0 - self.beta;
        self.amplitude * ((-lo).powf(p) - (-hi).powf(p)) / p
    }
}

/// Cell average of `j` over `[x_i - hx/2, x_i + hx/2]` for every column.
pub fn cell_averaged_j(density: &CurrentDensity, grid: &Grid2D) -> Vec<f64> {
    if let Some(cols) = &density.column_override {
        return cols.clone();
    }
    let hx = grid.hx();
    (0..=grid.nx)
        .map(|i| {
            let x = grid.x(i);
            density.integral(x - 0.5 * hx, x + 0.5 * hx) / hx
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_line_at_zero() {
        let g = Grid2D::from_nodes(1.0, 1.0, 257, 129).unwrap();
        assert_eq!(g.i_zero(), 128);
        assert_eq!(g.x(g.i_zero()), 0.0);
        assert!(Grid2D::new(1.0, 2.0, 16, 16).is_err());
        assert!(Grid2D::new(1.0, 2.0, 15, 16).is_ok());
    }

    #[test]
    fn bounded_density_is_exact() {
        let g = Grid2D::new(1.0, 1.0, 32, 16).unwrap();
        let d = CurrentDensity::new(0.3, 0.0, 1.0).unwrap();
        let j = cell_averaged_j(&d, &g);
        for (i, v) in j.iter().enumerate().take(g.i_zero()).skip(1) {
            assert!((v - 0.3).abs() < 1e-15, "{i}");
        }
        assert!((j[g.i_zero()] - 0.15).abs() < 1e-15);
        assert!(j[g.i_zero() + 1..].iter().all(|&v| v == 0.0));
        let z = cell_averaged_j(&CurrentDensity::new(0.0, 0.25, 1.0).unwrap(), &g);
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singular_column_matches_midpoint_rule() {
        let g = Grid2D::new(1.0, 1.0, 64, 32).unwrap();
        let d = CurrentDensity::new(1.0, 0.25, 1.0).unwrap();
        let j = cell_averaged_j(&d, &g);
        let i = g.i_zero() - 1;
        let (lo, hi) = (g.x(i) - 0.5 * g.hx(), g.x(i) + 0.5 * g.hx());
        let n = 100_000;
        let h = (hi - lo) / n as f64;
        let mid: f64 = (0..n).map(|k| d.eval(lo + (k as f64 + 0.5) * h)).sum::<f64>() * h / g.hx();
        assert!((j[i] - mid).abs() < 1e-10, "{} {}", j[i], mid);
    }
}
