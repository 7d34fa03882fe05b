//! Sub- and supersolutions of the form `r^α U(θ)` near the cathode edge.
//!
//! With `j(x) = A(-x)^{-β}` on the cathode, `r^α U(θ)` solves the equation on
//! `{π/2 < θ < π}` iff `-U'' + V(θ)/√U = α² U` where `V(θ) = A(-cos θ)^{-β}`
//! and `α = 2(2-β)/3`. The angular profiles are glued to harmonic pieces on
//! the anode side and checked on the grid.

mod angular;
mod fields;
mod jump;

pub use angular::{
    assemble_subsolution, assemble_subsolution_with, blend_w, build_v1, shoot_v2, AngularPiece, AngularProfile,
    BlendCoefficients, Junction, Piece, PieceKind, PowerPiece, SubParams, V2Model,
};
pub use fields::{
    build_supersolution, check_amplitude, default_candidates, discrete_check, feasibility_search, largest_feasible_amplitude, robin_margin,
    subsolution_field, BoundaryCheck, DiscreteCheck, FeasibilityReport, SearchOutcome, SubFieldReport,
    SubsolutionField, SuperReport, SupersolutionField,
};
pub use jump::{curve_jump, vertical_jump, JumpReport, JumpSample, Sense};

#[allow(unused_imports)]
use num_traits::Float;

/// `α = 2(2-β)/3`, the homogeneity making `r^α U(θ)` balance `r^{-β}/√u`.
pub fn exponent_for(beta: f64) -> f64 {
    2.0 * (2.0 - beta) / 3.0
}

/// `V(θ) = A(-cos θ)^{-β}` on `(π/2, π]`.
pub fn potential(amplitude: f64, beta: f64, theta: f64) -> f64 {
    if beta == 0.0 {
        return amplitude;
    }
    amplitude * (-theta.cos()).max(0.0).powf(-beta)
}
