//! One-dimensional Child-Langmuir profiles.
//!
//! The autonomous problem is `-u'' + j/√u = 0` on `(0, 1)` with `u(0) = 0`,
//! `u(1) = 1`. Depending on `j` the solution is flat (`j = 4/9`), has a dead
//! core `[0, ξ]` (`j > 4/9`) or is positive with `u'(0) > 0` (`j < 4/9`).
//! The power-law family replaces `j` by `λ y^q`.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{quad, roots, Error, Result};

/// Critical current of the autonomous problem.
pub const J_FLAT: f64 = 4.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Flat,
    FreeBoundary,
    Subcritical,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Flat => "Flat",
            Regime::FreeBoundary => "FreeBoundary",
            Regime::Subcritical => "Subcritical",
        }
    }
}

/// Whether a profile solves the equation or only bounds a solution from below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Solution,
    /// `(y^p + εy)/(1 + ε)`, a subsolution for `λ < λ_q*`.
    Subsolution { eps: f64 },
}

/// Table used to seed Newton when inverting `H`.
#[derive(Debug, Clone, PartialEq)]
struct InverseTable {
    sigma: Vec<f64>,
    h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm1D {
    pub regime: Regime,
    /// `j` for the autonomous problem, `λ` for the power-law family.
    pub j_amplitude: f64,
    pub q_exponent: f64,
    pub xi: f64,
    pub amp: f64,
    /// `(A₀, B₀)` with `H(A₀) = B₀ = 2√j A₀^{3/4}`.
    pub h_constants: Option<(f64, f64)>,
    pub kind: Kind,
    table: Option<InverseTable>,
}

/// `H(σ) = ∫₀^σ ds / √(√s + 1)`.
///
/// Evaluated with `s = t²`, which turns the integrand into the smooth
/// `2t/√(t + 1)` on `[0, √σ]`.
pub fn h_integral(sigma: f64, tol: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain { name: "sigma", value: sigma, expected: "[0, inf)" });
    }
    let e = quad::integrate(|t| 2.0 * t / (t + 1.0).sqrt(), 0.0, sigma.sqrt(), tol * 1e-3, tol)?;
    Ok(e.value)
}

/// `H'(σ) = (√σ + 1)^{-1/2}`.
pub fn h_prime(sigma: f64) -> f64 {
    1.0 / (sigma.sqrt() + 1.0).sqrt()
}

/// `λ_q* = 2(1+2q)(2+q)/9`, the flat threshold for `j(y) = λ y^q`.
///
/// `q = 1` is included: there `u = y²` solves `-u'' + 2y/√u = 0` exactly.
pub fn lambda_q_star(q: f64) -> Result<f64> {
    if !(q > -0.5 && q <= 1.0) {
        return Err(Error::Domain { name: "q", value: q, expected: "(-1/2, 1]" });
    }
    Ok(2.0 * (1.0 + 2.0 * q) * (2.0 + q) / 9.0)
}

/// `C_q(λ) = [9λ / (2(1+2q)(2+q))]^{2/3}`.
pub fn c_q(q: f64, lambda: f64) -> Result<f64> {
    Ok((lambda / lambda_q_star(q)?).powf(2.0 / 3.0))
}

/// The flat profile `u = y^{4/3}` with `j = 4/9`.
pub fn flat_solution_1d() -> ClosedForm1D {
    ClosedForm1D {
        regime: Regime::Flat,
        j_amplitude: J_FLAT,
        q_exponent: 0.0,
        xi: 0.0,
        amp: 1.0,
        h_constants: None,
        kind: Kind::Solution,
        table: None,
    }
}

/// `u = amp (y - ξ)₊^{4/3}` with `ξ = 1 - 1/√(9j/4)` and `amp = (9j/4)^{2/3}`.
pub fn free_boundary_solution_1d(j: f64) -> Result<ClosedForm1D> {
    if !(j > J_FLAT) {
        return Err(Error::RegimeMismatch {
            value: j,
            detail: format!("free boundary needs j > 4/9, got {j}"),
        });
    }
    let s = 9.0 * j / 4.0;
    Ok(ClosedForm1D {
        regime: Regime::FreeBoundary,
        j_amplitude: j,
        q_exponent: 0.0,
        xi: 1.0 - 1.0 / s.sqrt(),
        amp: s.powf(2.0 / 3.0),
        h_constants: None,
        kind: Kind::Solution,
        table: None,
    })
}

/// Positive solution for `0 < j < 4/9`, `u(y) = H⁻¹(B₀ y)/A₀`.
///
/// `A₀` solves `H(σ)/σ^{3/4} = 2√j`; the left side increases from 0 to 4/3,
/// so bisection on a doubled bracket always succeeds.
pub fn subcritical_solution_1d(j: f64, tol: f64) -> Result<ClosedForm1D> {
    if !(j > 0.0 && j < J_FLAT) {
        return Err(Error::RegimeMismatch {
            value: j,
            detail: format!("subcritical needs 0 < j < 4/9, got {j}"),
        });
    }
    let target = 2.0 * j.sqrt();
    let qtol = 1e-15;
    let g = |s: f64| h_integral(s, qtol).map_or(f64::NAN, |h| h / s.powf(0.75) - target);
    // Below the root g < 0; H(σ)/σ^{3/4} ≈ σ^{1/4} for small σ.
    let lo = (0.5 * target).powi(4).min(1.0);
    let lo = if g(lo) < 0.0 { lo } else { lo * 1e-8 };
    let (lo, hi) = roots::expand_upward(g, lo, (2.0 * lo).max(1.0))?;
    let a0 = roots::bisect(g, lo, hi, tol.max(1e-15))?;
    let b0 = h_integral(a0, qtol)?;
    let n = 64;
    let sigma: Vec<f64> = (0..=n).map(|k| a0 * k as f64 / n as f64).collect();
    let h = sigma.iter().map(|&s| h_integral(s, qtol)).collect::<Result<Vec<_>>>()?;
    Ok(ClosedForm1D {
        regime: Regime::Subcritical,
        j_amplitude: j,
        q_exponent: 0.0,
        xi: 0.0,
        amp: b0 / a0,
        h_constants: Some((a0, b0)),
        kind: Kind::Solution,
        table: Some(InverseTable { sigma, h }),
    })
}

/// Closed forms for `j(y) = λ y^q`.
///
/// * `λ = λ_q*`: flat, `y^p` with `p = (4+2q)/3`.
/// * `λ > λ_q*`: `amp (y-ξ)₊^p`. For `q ≠ 0` this is an exact solution for the
///   shifted coefficient `λ (y-ξ)₊^q` (see [`ClosedForm1D::coefficient`]).
/// * `λ < λ_q*`: no closed form is known; returns the subsolution
///   `(y^p + εy)/(1+ε)` marked [`Kind::Subsolution`].
pub fn power_solution_nonautonomous(q: f64, lambda: f64) -> Result<ClosedForm1D> {
    let star = lambda_q_star(q)?;
    if !(lambda > 0.0) {
        return Err(Error::Domain { name: "lambda", value: lambda, expected: "(0, inf)" });
    }
    let ratio = lambda / star;
    let mut out = ClosedForm1D {
        regime: Regime::Flat,
        j_amplitude: lambda,
        q_exponent: q,
        xi: 0.0,
        amp: 1.0,
        h_constants: None,
        kind: Kind::Solution,
        table: None,
    };
    if (ratio - 1.0).abs() <= 1e-14 {
        return Ok(out);
    }
    if ratio > 1.0 {
        out.regime = Regime::FreeBoundary;
        out.xi = 1.0 - ratio.powf(-1.0 / (2.0 + q));
        out.amp = ratio.powf(2.0 / 3.0);
    } else {
        out.regime = Regime::Subcritical;
        out.kind = Kind::Subsolution { eps: (ratio.powf(-2.0 / 3.0) - 1.0) / 2.0 };
    }
    Ok(out)
}

impl ClosedForm1D {
    /// Exponent of the power profile, `(4+2q)/3`.
    pub fn exponent(&self) -> f64 {
        (4.0 + 2.0 * self.q_exponent) / 3.0
    }

    /// The coefficient `j(y)` for which this profile is an exact solution
    /// (or subsolution).
    pub fn coefficient(&self, y: f64) -> f64 {
        let q = self.q_exponent;
        if q == 0.0 {
            return self.j_amplitude;
        }
        let base = if self.regime == Regime::FreeBoundary { (y - self.xi).max(0.0) } else { y };
        self.j_amplitude * base.powf(q)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let p = self.exponent();
        match (self.regime, self.kind) {
            (_, Kind::Subsolution { eps }) => (y.powf(p) + eps * y) / (1.0 + eps),
            (Regime::Subcritical, Kind::Solution) => self.subcritical_eval(y),
            _ => self.amp * (y - self.xi).max(0.0).powf(p),
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        let p = self.exponent();
        match (self.regime, self.kind) {
            (_, Kind::Subsolution { eps }) => (p * y.powf(p - 1.0) + eps) / (1.0 + eps),
            (Regime::Subcritical, Kind::Solution) => {
                // u = σ/A₀ with H(σ) = B₀y, so u' = B₀ √(√σ+1) / A₀.
                let (a0, b0) = self.h_constants.unwrap_or((1.0, 1.0));
                let sigma = a0 * self.subcritical_eval(y);
                b0 * (sigma.sqrt() + 1.0).sqrt() / a0
            }
            _ => {
                let s = (y - self.xi).max(0.0);
                self.amp * p * s.powf(p - 1.0)
            }
        }
    }

    /// Analytic `u''`, infinite where the profile is singular.
    pub fn second_derivative(&self, y: f64) -> f64 {
        let p = self.exponent();
        match (self.regime, self.kind) {
            (_, Kind::Subsolution { eps }) => p * (p - 1.0) * y.powf(p - 2.0) / (1.0 + eps),
            (Regime::Subcritical, Kind::Solution) => {
                let (a0, b0) = self.h_constants.unwrap_or((1.0, 1.0));
                b0 * b0 / (4.0 * a0.powf(1.5)) / self.subcritical_eval(y).sqrt()
            }
            _ => {
                let s = y - self.xi;
                if s <= 0.0 {
                    0.0
                } else {
                    self.amp * p * (p - 1.0) * s.powf(p - 2.0)
                }
            }
        }
    }

    /// `u'(0)` for the subcritical solution, `B₀/A₀`.
    pub fn slope_at_zero(&self) -> f64 {
        match self.h_constants {
            Some((a0, b0)) => b0 / a0,
            None => self.derivative(0.0),
        }
    }

    fn subcritical_eval(&self, y: f64) -> f64 {
        let (a0, b0) = match self.h_constants {
            Some(c) => c,
            None => return f64::NAN,
        };
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        let tau = b0 * y;
        let (lo, hi, seed) = match &self.table {
            Some(t) => {
                let k = t.h.partition_point(|&h| h <= tau).clamp(1, t.h.len() - 1);
                let (s0, s1, h0, h1) = (t.sigma[k - 1], t.sigma[k], t.h[k - 1], t.h[k]);
                (s0, s1, s0 + (s1 - s0) * (tau - h0) / (h1 - h0))
            }
            None => (0.0, a0, a0 * y),
        };
        let sigma = roots::safeguarded_newton(
            |s| h_integral(s, 1e-15).unwrap_or(f64::NAN),
            h_prime,
            tau,
            lo,
            hi,
            seed,
            1e-15,
        )
        .unwrap_or(seed);
        sigma / a0
    }

    /// Samples `(y, u)` on `n + 1` equispaced nodes of `[0, 1]`.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|i| {
                let y = i as f64 / n as f64;
                (y, self.eval(y))
            })
            .collect()
    }
}

/// Outcome of [`residual_1d`].
#[derive(Debug, Clone, PartialEq)]
pub struct Residual1D {
    pub max: f64,
    pub argmax: f64,
    /// Points skipped because `u = 0` there.
    pub excluded: Vec<f64>,
}

/// How `u''` is obtained in [`residual_1d`].
pub enum Profile<'a> {
    /// Use the analytic second derivative of a closed form.
    Analytic(&'a ClosedForm1D),
    /// Use fourth-order central differences with step `h` of an evaluable profile.
    Sampled(&'a dyn Fn(f64) -> f64, f64),
}

/// Max over interior points `y_i = i/n`, `lo ≤ y_i ≤ 1 - lo`, of
/// `|-u'' + j(y)/√u|`.
pub fn residual_1d(profile: Profile<'_>, j: &dyn Fn(f64) -> f64, n: usize, lo: f64) -> Residual1D {
    let mut out = Residual1D { max: 0.0, argmax: f64::NAN, excluded: Vec::new() };
    for i in 1..n {
        let y = i as f64 / n as f64;
        if y < lo || y > 1.0 - lo {
            continue;
        }
        let (u, upp) = match &profile {
            Profile::Analytic(c) => (c.eval(y), c.second_derivative(y)),
            Profile::Sampled(f, h) => {
                if y - 2.0 * h < 0.0 || y + 2.0 * h > 1.0 {
                    continue;
                }
                let d = (-f(y + 2.0 * h) + 16.0 * f(y + h) - 30.0 * f(y) + 16.0 * f(y - h)
                    - f(y - 2.0 * h))
                    / (12.0 * h * h);
                (f(y), d)
            }
        };
        if !(u > 0.0) {
            out.excluded.push(y);
            continue;
        }
        let r = (-upp + j(y) / u.sqrt()).abs();
        if r > out.max || out.argmax.is_nan() {
            out.max = r;
            out.argmax = y;
        }
    }
    out
}
