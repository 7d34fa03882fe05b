//! Five-point finite differences for `-Δu + j(x)/√u = 0` on `(-a, b) × (0, 1)`.
//!
//! Solutions are found by monotone (Picard) iteration between an ordered
//! sub/supersolution pair. Every iterate is a direct Poisson solve, so the
//! discrete comparison principle of the M-matrix carries over exactly.

mod diagnostics;
mod grid;
mod iterate;
mod poisson;

pub use diagnostics::{
    barrier_bound_check, column_j_slope, edge_flux_profile, flat_exponent_fit, min_flux_in_window,
    nondegeneracy_check, residual_norm, weak_floor, wings_experiment, BarrierCheck, ExponentFit, WingsRow,
    WingsSpec,
};
pub use grid::{boundary_value, cell_averaged_j, CurrentDensity, Field2D, Grid2D};
pub use iterate::{monotone_iterate, solve_between, BetweenReport, Direction, IterationReport, ORDER_SLACK};
pub use poisson::{poisson_solve, PoissonSolver, SOLVE_TOL};
