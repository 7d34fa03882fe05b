//! Numerics for the singular Child-Langmuir problem `-Δu + j(x)/√u = 0`.
//!
//! The crate is `no_std` (it only needs `alloc`). Everything here is a pure,
//! deterministic function of its inputs; file formats and the command line
//! live in the `flatbeam` companion crate.
//!
//! * [`closed_forms`]: exact and semi-analytic 1D solutions.
//! * [`timemap`]: the time map of `-U'' + V0/√U = λU` and its bifurcation diagram.
//! * [`polar_matching`]: angular sub/supersolutions glued across the cathode edge.
//! * [`elliptic2d`]: five-point monotone iteration on the rectangle and its diagnostics.
//! * [`parabolic`]: IMEX evolution and comparison diagnostics.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod closed_forms;
pub mod elliptic2d;
mod error;
pub mod ode;
pub mod parabolic;
pub mod polar_matching;
pub mod quad;
pub mod roots;
pub mod timemap;

pub use error::{Error, Result};
