use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// The parameters select a different regime than the one requested.
    RegimeMismatch { value: f64, detail: String },
    /// A root finder could not bracket or isolate a root.
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// Adaptive quadrature ran out of subdivisions.
    Quadrature { estimate: f64, error: f64 },
    /// An ODE integration stopped early.
    Integration { at: f64, detail: String },
    /// A compact-support bump was shifted outside the interval.
    ShiftRange { z: f64, lo: f64, hi: f64 },
    /// A construction is mathematically infeasible for the given parameters.
    Infeasible { detail: String },
    /// An iteration did not reach its tolerance.
    NonConvergence { iterations: usize, residual: f64 },
    /// A monotone scheme produced an out-of-order iterate.
    Ordering { detail: String, worst: f64 },
    /// A time step above the stability bound of the scheme.
    StepTooLarge { dt: f64, safe: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { name, value, expected } => {
                write!(f, "{name} = {value} is outside {expected}")
            }
            Error::RegimeMismatch { value, detail } => {
                write!(f, "regime mismatch at {value}: {detail}")
            }
            Error::Bracket { lo, hi, f_lo, f_hi } => write!(
                f,
                "no root isolated in [{lo}, {hi}] (f = {f_lo}, {f_hi})"
            ),
            Error::Quadrature { estimate, error } => write!(
                f,
                "quadrature did not converge: estimate {estimate}, error {error}"
            ),
            Error::Integration { at, detail } => {
                write!(f, "integration stopped at {at}: {detail}")
            }
            Error::ShiftRange { z, lo, hi } => {
                write!(f, "shift {z} outside admissible range [{lo}, {hi}]")
            }
            Error::Infeasible { detail } => write!(f, "infeasible: {detail}"),
            Error::NonConvergence { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual})"
            ),
            Error::Ordering { detail, worst } => {
                write!(f, "ordering violated: {detail} (worst {worst})")
            }
            Error::StepTooLarge { dt, safe } => {
                write!(f, "dt = {dt} exceeds the safe step {safe}")
            }
        }
    }
}

impl core::error::Error for Error {}
